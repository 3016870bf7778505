#include "crsir/panel.hpp"

#include "crsir/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace crsir {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') {
            quoted = !quoted;
        } else if (ch == ',' && !quoted) {
            out.push_back(trim(field));
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    out.push_back(trim(field));
    return out;
}

// Data rows start on file line 2.
std::size_t line_of(std::size_t index) { return index + 2; }

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

TransformCode parse_transform_code(const std::string& code) {
    if (code == "none") return TransformCode::None;
    if (code == "log") return TransformCode::Log;
    if (code == "diff") return TransformCode::Diff;
    if (code == "diff2") return TransformCode::Diff2;
    if (code == "logdiff") return TransformCode::LogDiff;
    if (code == "logdiff2") return TransformCode::LogDiff2;
    throw UnknownTransformCode(code);
}

std::string to_string(TransformCode code) {
    switch (code) {
        case TransformCode::None: return "none";
        case TransformCode::Log: return "log";
        case TransformCode::Diff: return "diff";
        case TransformCode::Diff2: return "diff2";
        case TransformCode::LogDiff: return "logdiff";
        case TransformCode::LogDiff2: return "logdiff2";
    }
    return "none";
}

void PanelConfig::validate() const {
    if (window_length < 40) throw DomainError("window_length must be at least 40");
    if (horizons.empty()) throw DomainError("at least one forecast horizon is required");
    for (int h : horizons) {
        if (h < 1) throw DomainError("forecast horizons must be positive");
    }
    if (cv_grid.clusters.empty() || cv_grid.taus.empty()) throw DomainError("cross-validation grid is empty");
    for (int c : cv_grid.clusters) {
        if (c < 1) throw DomainError("grid cluster counts must be positive");
    }
    for (double t : cv_grid.taus) {
        if (!(t >= 0.0 && t <= 1.0)) throw DomainError("grid tau values must lie in [0, 1]");
    }
    if (slices != 0 && slices < 2) throw DomainError("slices must be 0 (automatic) or at least 2");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    if (winsorize_iqr < 0.0) throw DomainError("winsorize_iqr must be non-negative");
    if (threads < 1) throw DomainError("threads must be positive");
}

PanelConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw DomainError(std::string("config is not valid JSON: ") + e.what());
    }
    PanelConfig cfg;
    try {
        if (j.contains("data_path")) {
            std::filesystem::path p = j.at("data_path").get<std::string>();
            cfg.data_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        }
        if (j.contains("transform_codes")) {
            for (const auto& [name, code] : j.at("transform_codes").items()) {
                cfg.transform_codes[name] = parse_transform_code(code.get<std::string>());
            }
        }
        if (j.contains("forecast_targets")) cfg.forecast_targets = j.at("forecast_targets").get<std::vector<std::string>>();
        if (j.contains("predictors")) cfg.predictors = j.at("predictors").get<std::vector<std::string>>();
        if (j.contains("horizons")) cfg.horizons = j.at("horizons").get<std::vector<int>>();
        if (j.contains("window_length")) cfg.window_length = j.at("window_length").get<int>();
        if (j.contains("cv_grid")) {
            const auto& g = j.at("cv_grid");
            if (g.contains("c")) cfg.cv_grid.clusters = g.at("c").get<std::vector<int>>();
            if (g.contains("tau")) cfg.cv_grid.taus = g.at("tau").get<std::vector<double>>();
        }
        if (j.contains("H")) cfg.slices = j.at("H").get<int>();
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("eval_start")) cfg.eval_start = j.at("eval_start").get<int>();
        if (j.contains("eval_end")) cfg.eval_end = j.at("eval_end").get<int>();
        if (j.contains("winsorize_iqr")) cfg.winsorize_iqr = j.at("winsorize_iqr").get<double>();
        if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("bad config field: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

PanelConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

Eigen::Index Panel::column(const std::string& name) const {
    const auto& names = series.column_names;
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw DomainError("unknown series '" + name + "'");
    return static_cast<Eigen::Index>(it - names.begin());
}

std::vector<double> Panel::target(const std::string& name) const {
    const Eigen::Index j = column(name);
    std::vector<double> out(static_cast<std::size_t>(series.rows()));
    for (Eigen::Index i = 0; i < series.rows(); ++i) out[static_cast<std::size_t>(i)] = series.values(i, j);
    return out;
}

RawTable parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    RawTable out;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        if (out.names.empty()) {
            out.names = std::move(fields);
            for (std::size_t j = 0; j < out.names.size(); ++j) {
                if (out.names[j].empty()) throw ParseError("empty series name", line_no, j + 1);
            }
            continue;
        }
        if (fields.size() != out.names.size()) {
            throw ParseError("expected " + std::to_string(out.names.size()) + " fields, found " +
                                 std::to_string(fields.size()),
                             line_no, std::min(fields.size(), out.names.size()) + 1);
        }
        std::vector<double> row(fields.size(), kMissing);
        for (std::size_t j = 0; j < fields.size(); ++j) {
            const std::string& f = fields[j];
            if (f.empty() || f == "NA" || f == "NaN" || f == "nan") continue;
            double v = 0.0;
            const char* begin = f.data();
            const char* end = begin + f.size();
            if (*begin == '+') ++begin;
            const auto [ptr, ec] = std::from_chars(begin, end, v);
            if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
                throw ParseError("cannot parse '" + f + "' as a number", line_no, j + 1);
            }
            row[j] = v;
        }
        rows.push_back(std::move(row));
    }
    if (out.names.empty()) throw ParseError("missing header row", 1, 1);
    out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.names.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
            out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return out;
}

RawTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string(), 0, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

std::vector<double> apply_transform(const std::vector<double>& raw, TransformCode code, std::size_t column) {
    const std::size_t t = raw.size();
    std::vector<double> level(raw);
    const bool take_log = code == TransformCode::Log || code == TransformCode::LogDiff || code == TransformCode::LogDiff2;
    if (take_log) {
        for (std::size_t i = 0; i < t; ++i) {
            if (std::isnan(raw[i])) continue;
            if (!(raw[i] > 0.0)) {
                std::ostringstream msg;
                msg << "log transform of non-positive value " << raw[i];
                throw ParseError(msg.str(), line_of(i), column);
            }
            level[i] = std::log(raw[i]);
        }
    }
    int differences = 0;
    if (code == TransformCode::Diff || code == TransformCode::LogDiff) differences = 1;
    if (code == TransformCode::Diff2 || code == TransformCode::LogDiff2) differences = 2;
    for (int d = 0; d < differences; ++d) {
        std::vector<double> next(t, kMissing);
        for (std::size_t i = 1; i < t; ++i) next[i] = level[i] - level[i - 1];
        level = std::move(next);
    }
    return level;
}

Panel build_panel(const RawTable& raw, const PanelConfig& config) {
    const auto t = static_cast<std::size_t>(raw.values.rows());
    const std::size_t n = raw.names.size();
    for (const auto& [name, code] : config.transform_codes) {
        if (std::find(raw.names.begin(), raw.names.end(), name) == raw.names.end()) {
            throw DomainError("transform code given for unknown series '" + name + "'");
        }
    }

    std::vector<std::vector<double>> cols(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> col(t);
        for (std::size_t i = 0; i < t; ++i) col[i] = raw.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        const auto it = config.transform_codes.find(raw.names[j]);
        const TransformCode code = it == config.transform_codes.end() ? TransformCode::None : it->second;
        cols[j] = apply_transform(col, code, j + 1);

        if (config.winsorize_iqr > 0.0) {
            std::vector<double> present;
            for (double v : cols[j]) {
                if (!std::isnan(v)) present.push_back(v);
            }
            if (present.size() >= 4) {
                std::sort(present.begin(), present.end());
                const double med = quantile_sorted(present, 0.5);
                const double iqr = quantile_sorted(present, 0.75) - quantile_sorted(present, 0.25);
                const double lo = med - config.winsorize_iqr * iqr;
                const double hi = med + config.winsorize_iqr * iqr;
                for (double& v : cols[j]) {
                    if (!std::isnan(v)) v = std::clamp(v, lo, hi);
                }
            }
        }
    }

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < t; ++i) {
        bool complete = true;
        for (std::size_t j = 0; j < n && complete; ++j) complete = !std::isnan(cols[j][i]);
        if (complete) keep.push_back(i);
    }
    Matrix values(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        for (std::size_t j = 0; j < n; ++j) values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = cols[j][keep[r]];
    }
    return {DataMatrix(std::move(values), raw.names), t - keep.size()};
}

Panel load_panel(const PanelConfig& config) { return build_panel(read_csv(config.data_path), config); }

void write_csv(const std::filesystem::path& path, const DataMatrix& data) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path.string());
    for (std::size_t j = 0; j < data.column_names.size(); ++j) out << (j ? "," : "") << data.column_names[j];
    out << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "," : "") << data.values(i, j);
        out << '\n';
    }
}

}  // namespace crsir
