#include "crsir/evaluation.hpp"

#include "crsir/baselines.hpp"
#include "crsir/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <thread>

namespace crsir {

double rmse(std::span<const double> pred, std::span<const double> obs) {
    if (pred.size() != obs.size()) throw LengthMismatch("prediction and observation lengths differ");
    if (pred.empty()) throw LengthMismatch("RMSE needs at least one observation");
    double ss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - obs[i]) * (pred[i] - obs[i]);
    return std::sqrt(ss / static_cast<double>(pred.size()));
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return std::nan("");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ResidualizedWindow residualize_window(const Matrix& x_hist, std::span<const double> y_hist, int horizon, int window) {
    if (horizon < 1) throw DomainError("forecast horizon must be positive");
    if (static_cast<std::size_t>(x_hist.rows()) != y_hist.size()) throw LengthMismatch("panel rows and target length differ");
    const auto t0 = static_cast<Eigen::Index>(y_hist.size()) - 1;
    const Eigen::Index first = t0 - window + 1;
    const Eigen::Index last = t0 - horizon;
    if (first < kArOrder - 1) {
        throw TooShort("window of " + std::to_string(window) + " plus lags needs " + std::to_string(window + kArOrder - 1) +
                       " rows, history has " + std::to_string(t0 + 1));
    }
    const Eigen::Index n = last - first + 1;
    if (n < kArOrder + 2) throw TooShort("window too short for the horizon");

    Matrix design(n, kArOrder + 1);
    design.col(0).setOnes();
    design.rightCols(kArOrder) = ar_lags(y_hist, first, last);

    Matrix targets(n, x_hist.cols() + 1);
    for (Eigen::Index i = 0; i < n; ++i) targets(i, 0) = y_hist[static_cast<std::size_t>(first + i + horizon)];
    targets.rightCols(x_hist.cols()) = x_hist.middleRows(first, n);

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    cod.setThreshold(1e-10);
    const Matrix coef = cod.solve(targets);
    const Matrix resid = targets - design * coef;

    ResidualizedWindow out;
    out.rank_deficient = cod.rank() < design.cols();
    out.y_coef = coef.col(0);
    out.x_coef = coef.rightCols(x_hist.cols());
    out.y_tilde.assign(resid.col(0).data(), resid.col(0).data() + n);
    out.x_tilde = resid.rightCols(x_hist.cols());
    out.origin_lags.resize(kArOrder + 1);
    out.origin_lags(0) = 1.0;
    out.origin_lags.tail(kArOrder) = ar_lags(y_hist, t0, t0).row(0).transpose();
    out.origin_x_tilde = x_hist.row(t0).transpose() - out.x_coef.transpose() * out.origin_lags;
    return out;
}

std::vector<int> training_indices(int i, int n, int horizon) {
    std::vector<int> out;
    const int gap = 2 * horizon + 3;
    for (int j = 1; j <= i - gap; ++j) out.push_back(j);
    for (int j = std::max(1, i + gap); j <= n; ++j) out.push_back(j);
    return out;
}

namespace {

// Losses within rounding of each other count as ties.
bool better(const GridScore& a, const GridScore& b) {
    if (std::abs(a.loss - b.loss) > 1e-12 * std::max(a.loss, b.loss)) return a.loss < b.loss;
    if (a.clusters != b.clusters) return a.clusters < b.clusters;
    return a.tau > b.tau;
}

}  // namespace

CvResult cross_validate(const ResidualizedWindow& window, int horizon, const CvGrid& grid, const CvOptions& options) {
    if (grid.clusters.empty() || grid.taus.empty()) throw DomainError("cross-validation grid is empty");
    const auto n = static_cast<int>(window.x_tilde.rows());
    const Eigen::Index predictors = window.x_tilde.cols();

    CvResult out;
    for (int c : grid.clusters) {
        for (double tau : grid.taus) out.scores.push_back({c, tau, 0.0, 0, 0, false});
    }
    if (out.scores.size() == 1) {
        out.clusters = out.scores[0].clusters;
        out.tau = out.scores[0].tau;
        out.scores[0].qualified = true;
        return out;
    }

    const std::size_t taus = grid.taus.size();
    std::vector<double> sse(out.scores.size(), 0.0);
    for (int i = 1; i <= n; ++i) {
        const std::vector<int> train = training_indices(i, n, horizon);
        const auto rows = static_cast<Eigen::Index>(train.size());
        Matrix xt(rows, predictors);
        std::vector<double> yt(train.size());
        for (Eigen::Index r = 0; r < rows; ++r) {
            xt.row(r) = window.x_tilde.row(train[static_cast<std::size_t>(r)] - 1);
            yt[static_cast<std::size_t>(r)] = window.y_tilde[static_cast<std::size_t>(train[static_cast<std::size_t>(r)] - 1)];
        }
        const Matrix held_out = window.x_tilde.row(i - 1);
        const double target = window.y_tilde[static_cast<std::size_t>(i - 1)];

        auto fail_range = [&](std::size_t from, std::size_t count) {
            for (std::size_t g = from; g < from + count; ++g) ++out.scores[g].failures;
        };

        CrsirPreparation prep;
        try {
            prep = crsir_prepare(DataMatrix(std::move(xt)));
        } catch (const Error&) {
            fail_range(0, out.scores.size());
            continue;
        }
        for (std::size_t ci = 0; ci < grid.clusters.size(); ++ci) {
            const int c = grid.clusters[ci];
            if (c > predictors) continue;
            BlockDesign design;
            try {
                design = crsir_block_design(prep, c, yt, options.slices);
            } catch (const Error&) {
                fail_range(ci * taus, taus);
                continue;
            }
            for (std::size_t ti = 0; ti < taus; ++ti) {
                GridScore& score = out.scores[ci * taus + ti];
                try {
                    const CrsirModel model =
                        crsir_fit_design(prep, design, yt, grid.taus[ti], options.alpha);
                    const double err = target - model.predict(held_out)(0);
                    sse[ci * taus + ti] += err * err;
                    ++score.evaluated;
                } catch (const Error&) {
                    ++score.failures;
                }
            }
        }
    }

    const GridScore* best = nullptr;
    for (std::size_t g = 0; g < out.scores.size(); ++g) {
        GridScore& s = out.scores[g];
        s.qualified = s.clusters <= predictors && s.evaluated > 0 &&
                      static_cast<double>(s.failures) <= options.max_failure_share * static_cast<double>(n);
        if (!s.qualified) continue;
        s.loss = sse[g] / static_cast<double>(s.evaluated);
        if (best == nullptr || better(s, *best)) best = &s;
    }
    if (best == nullptr) throw ConvergenceFailure("no cross-validation grid point qualified");
    out.clusters = best->clusters;
    out.tau = best->tau;
    return out;
}

CvResult cross_validate(const Matrix& x_hist, std::span<const double> y_hist, int horizon, const CvGrid& grid,
                        int window, const CvOptions& options) {
    return cross_validate(residualize_window(x_hist, y_hist, horizon, window), horizon, grid, options);
}

OriginForecast forecast_origin(const Matrix& x_hist, std::span<const double> y_hist, int horizon,
                               const PanelConfig& config) {
    OriginForecast out;
    const int w = config.window_length;
    const auto t0 = static_cast<Eigen::Index>(y_hist.size()) - 1;
    const Eigen::Index start = t0 - w - (kArOrder - 2);
    if (start < 0 || x_hist.rows() != t0 + 1) {
        out.error = "not enough history for the window";
        return out;
    }
    const Eigen::Index len = t0 - start + 1;
    const std::span<const double> y_seg = y_hist.subspan(static_cast<std::size_t>(start));

    // Predictors constant over the window carry no information and break standardization.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < x_hist.cols(); ++j) {
        const auto col = x_hist.col(j).segment(start, len);
        if (col.maxCoeff() > col.minCoeff()) keep.push_back(j);
    }
    Matrix x_seg(len, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) x_seg.col(static_cast<Eigen::Index>(k)) = x_hist.col(keep[k]).segment(start, len);

    auto note = [&](const std::string& what, const std::exception& e) {
        if (!out.error.empty()) out.error += "; ";
        out.error += what + ": " + e.what();
    };

    try {
        out.ar4 = ar4_forecast(y_seg, horizon).value;
        out.ar4_ok = std::isfinite(out.ar4);
    } catch (const Error& e) {
        note("AR(4)", e);
    }
    try {
        out.dfm5 = dfm5_forecast(DataMatrix(x_seg), y_seg, horizon).value;
        out.dfm5_ok = std::isfinite(out.dfm5);
    } catch (const Error& e) {
        note("DFM-5", e);
    }
    try {
        if (keep.empty()) throw DomainError("no non-constant predictors in the window");
        const ResidualizedWindow rw = residualize_window(x_seg, y_seg, horizon, w);
        const CvOptions cv_opts{config.slices, config.alpha, 0.10};
        const CvResult cv = cross_validate(rw, horizon, config.cv_grid, cv_opts);
        const int c = std::min<int>(cv.clusters, static_cast<int>(rw.x_tilde.cols()));
        const CrsirModel model = crsir_fit(DataMatrix(rw.x_tilde), rw.y_tilde, {c, cv.tau, config.slices, config.alpha});
        out.crsir = rw.ar_forecast() + model.predict(rw.origin_x_tilde.transpose())(0);
        out.crsir_ok = std::isfinite(out.crsir);
        out.clusters = c;
        out.tau = cv.tau;
    } catch (const Error& e) {
        note("CRSIR", e);
    }
    return out;
}

int first_origin(const PanelConfig& config) {
    const int earliest = config.window_length + kArOrder - 2;
    return config.eval_start < 0 ? earliest : std::max(config.eval_start, earliest);
}

std::vector<SeriesForecasts> collect_forecasts(const Panel& panel, const PanelConfig& config) {
    config.validate();
    const DataMatrix& data = panel.series;
    std::vector<std::string> targets = config.forecast_targets;
    if (targets.empty()) targets = data.column_names;

    struct Task {
        std::size_t series;
        int origin;
        std::size_t slot;
    };
    std::vector<SeriesForecasts> out;
    std::vector<Matrix> predictor_data;
    std::vector<Task> tasks;
    const int start = first_origin(config);
    const auto rows = static_cast<int>(data.rows());

    for (const std::string& target : targets) {
        const Eigen::Index tcol = panel.column(target);
        std::vector<Eigen::Index> cols;
        if (config.predictors.empty()) {
            for (Eigen::Index j = 0; j < data.cols(); ++j) {
                if (j != tcol) cols.push_back(j);
            }
        } else {
            for (const std::string& name : config.predictors) {
                const Eigen::Index j = panel.column(name);
                if (j != tcol) cols.push_back(j);
            }
        }
        Matrix px(data.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) px.col(static_cast<Eigen::Index>(k)) = data.values.col(cols[k]);

        for (int h : config.horizons) {
            SeriesForecasts sf;
            sf.series = target;
            sf.horizon = h;
            for (int t0 = start; t0 + h < rows && (config.eval_end < 0 || t0 <= config.eval_end); ++t0) {
                tasks.push_back({out.size(), t0, sf.origins.size()});
                sf.origins.push_back(t0);
                sf.observed.push_back(data.values(t0 + h, tcol));
            }
            sf.forecasts.resize(sf.origins.size());
            out.push_back(std::move(sf));
            predictor_data.push_back(px);
        }
    }

    std::vector<std::vector<double>> target_data(out.size());
    for (std::size_t s = 0; s < out.size(); ++s) target_data[s] = panel.target(out[s].series);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
            const Task& task = tasks[k];
            SeriesForecasts& sf = out[task.series];
            // Only rows up to the origin are handed to the forecaster.
            const Matrix x_hist = predictor_data[task.series].topRows(task.origin + 1);
            const std::span<const double> y_hist(target_data[task.series].data(), static_cast<std::size_t>(task.origin + 1));
            sf.forecasts[task.slot] = forecast_origin(x_hist, y_hist, sf.horizon, config);
        }
    };
    const auto threads = static_cast<std::size_t>(std::max(1, config.threads));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return out;
}

EvalReport summarize(const std::vector<SeriesForecasts>& series, const PanelConfig& config) {
    EvalReport report;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "Dimension selection: sequential chi-square test, statistic T * sum of trailing eigenvalues on "
                  "(p - k)(H - k - 1) degrees of freedom, alpha = %.3g; slices H = %s.",
                  config.alpha, config.slices > 0 ? std::to_string(config.slices).c_str() : "min(10, floor(T/4))");
    report.test_description = buf;

    for (const SeriesForecasts& sf : series) {
        std::vector<double> pred[3];
        std::vector<double> obs;
        std::map<std::pair<int, double>, int> chosen;
        for (std::size_t k = 0; k < sf.forecasts.size(); ++k) {
            const OriginForecast& f = sf.forecasts[k];
            if (!(f.ar4_ok && f.dfm5_ok && f.crsir_ok)) continue;
            pred[0].push_back(f.ar4);
            pred[1].push_back(f.dfm5);
            pred[2].push_back(f.crsir);
            obs.push_back(sf.observed[k]);
            ++chosen[{f.clusters, f.tau}];
        }
        const int used = static_cast<int>(obs.size());
        const int failures = static_cast<int>(sf.forecasts.size()) - used;
        std::string note;
        for (const OriginForecast& f : sf.forecasts) {
            if (!f.error.empty()) {
                note = f.error;
                break;
            }
        }

        int best_c = 0;
        double best_tau = 0.0;
        int best_count = -1;
        for (const auto& [key, count] : chosen) {
            // Map order is (c asc, tau asc); prefer larger tau on equal counts.
            if (count > best_count || (count == best_count && key.first == best_c && key.second > best_tau)) {
                best_count = count;
                best_c = key.first;
                best_tau = key.second;
            }
        }

        const double ar_rmse = used > 0 ? rmse(pred[0], obs) : 0.0;
        for (std::size_t m = 0; m < 3; ++m) {
            EvalRecord r;
            r.series = sf.series;
            r.horizon = sf.horizon;
            r.method = kMethods[m];
            r.forecasts = used;
            r.failures = failures;
            r.note = note;
            r.ok = used > 0;
            if (r.ok) {
                r.rmse = rmse(pred[m], obs);
                r.relative_rmse = m == 0 ? 1.0 : r.rmse / ar_rmse;
                if (!std::isfinite(r.relative_rmse)) r.ok = false;
            }
            if (m == 2) {
                r.chosen_clusters = best_c;
                r.chosen_tau = best_tau;
            }
            report.records.push_back(std::move(r));
        }
    }

    for (int h : config.horizons) {
        HorizonSummary s;
        s.horizon = h;
        std::vector<double> rel[3];
        for (const EvalRecord& r : report.records) {
            if (r.horizon != h || !r.ok) continue;
            for (std::size_t m = 0; m < 3; ++m) {
                if (r.method == kMethods[m]) rel[m].push_back(r.relative_rmse);
            }
        }
        s.series = static_cast<int>(rel[0].size());
        for (std::size_t m = 0; m < 3; ++m) {
            for (std::size_t p = 0; p < kPercentiles.size(); ++p) s.percentiles[m][p] = quantile(rel[m], kPercentiles[p]);
            s.beats_ar4[m] = static_cast<int>(std::count_if(rel[m].begin(), rel[m].end(), [](double v) { return v < 1.0; }));
        }
        report.summaries.push_back(s);
    }
    return report;
}

EvalReport rolling_oos(const Panel& panel, const PanelConfig& config) {
    return summarize(collect_forecasts(panel, config), config);
}

namespace {

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

}  // namespace

void EvalReport::write_csv(std::ostream& out) const {
    out << "series,h,method,rmse,rmse_relative_to_ar4,chosen_c,chosen_tau,n_forecasts,failures,note\n";
    for (const EvalRecord& r : records) {
        out << csv_field(r.series) << ',' << r.horizon << ',' << r.method << ',';
        if (r.ok) {
            out << fmt("%.10g", r.rmse) << ',' << fmt("%.10g", r.relative_rmse);
        } else {
            out << ",";
        }
        out << ',';
        if (r.method == kMethods[2] && r.ok) out << r.chosen_clusters << ',' << fmt("%g", r.chosen_tau);
        else out << ',';
        out << ',' << r.forecasts << ',' << r.failures << ',' << csv_field(r.note) << '\n';
    }
}

void EvalReport::write_markdown(std::ostream& out) const {
    out << "# Rolling pseudo out-of-sample evaluation\n\n" << test_description << "\n\n";
    out << "## Number of series with smaller RMSE than AR(4)\n\n";
    out << "| h | DFM-5 | CRSIR | series |\n|---|---:|---:|---:|\n";
    for (const HorizonSummary& s : summaries) {
        out << "| " << s.horizon << " | " << s.beats_ar4[1] << " | " << s.beats_ar4[2] << " | " << s.series << " |\n";
    }
    out << "\n## Distributions of relative RMSEs\n";
    for (const HorizonSummary& s : summaries) {
        out << "\n### h = " << s.horizon << "\n\n| Method |";
        for (double p : kPercentiles) out << ' ' << fmt("%.3f", p) << " |";
        out << "\n|---|---:|---:|---:|---:|---:|\n";
        for (std::size_t m = 0; m < 3; ++m) {
            out << "| " << kMethods[m] << " |";
            for (double v : s.percentiles[m]) out << ' ' << fmt("%.3f", v) << " |";
            out << '\n';
        }
    }
}

}  // namespace crsir
