#include "crsir/clustering.hpp"
#include "crsir/crsir.hpp"
#include "crsir/errors.hpp"
#include "crsir/evaluation.hpp"
#include "crsir/model_io.hpp"
#include "crsir/panel.hpp"
#include "crsir/simulation.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

namespace {

using namespace crsir;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

int exit_code(const Error& e) {
    switch (e.category()) {
    case Error::Category::Usage: return kExitUsage;
    case Error::Category::Data: return kExitData;
    case Error::Category::Numerical: return kExitNumerical;
    }
    return kExitUsage;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write " + path.string());
    return out;
}

/// Options shared by the subcommands that read a panel.
struct PanelArgs {
    std::string config;
    std::string data;
    std::optional<int> slices;
    std::optional<double> alpha;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "JSON config file");
        app->add_option("--data", data, "CSV panel (overrides data_path)");
        app->add_option("--slices,-H", slices, "slice count, 0 for automatic");
        app->add_option("--alpha", alpha, "level of the dimension test");
    }

    [[nodiscard]] PanelConfig resolve() const {
        PanelConfig cfg = config.empty() ? PanelConfig{} : load_config(config);
        if (!data.empty()) cfg.data_path = data;
        if (slices) cfg.slices = *slices;
        if (alpha) cfg.alpha = *alpha;
        if (cfg.data_path.empty()) throw DomainError("no data file: pass --data or set data_path in the config");
        return cfg;
    }
};

/// Predictor columns for `target`: the configured list, else every other series.
std::vector<Eigen::Index> predictor_columns(const Panel& panel, const PanelConfig& cfg, const std::string& target) {
    const Eigen::Index tcol = target.empty() ? -1 : panel.column(target);
    std::vector<Eigen::Index> cols;
    if (cfg.predictors.empty()) {
        for (Eigen::Index j = 0; j < panel.series.cols(); ++j) {
            if (j != tcol) cols.push_back(j);
        }
    } else {
        for (const std::string& name : cfg.predictors) {
            const Eigen::Index j = panel.column(name);
            if (j != tcol) cols.push_back(j);
        }
    }
    if (cols.empty()) throw DomainError("no predictor columns left");
    return cols;
}

DataMatrix select(const Panel& panel, const std::vector<Eigen::Index>& cols, Eigen::Index first, Eigen::Index rows) {
    Matrix x(rows, static_cast<Eigen::Index>(cols.size()));
    std::vector<std::string> names;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        x.col(static_cast<Eigen::Index>(k)) = panel.series.values.col(cols[k]).segment(first, rows);
        names.push_back(panel.series.column_names[static_cast<std::size_t>(cols[k])]);
    }
    return DataMatrix(std::move(x), std::move(names));
}

int run_simulate(int t, int runs, std::uint64_t seed, const CrsirOptions& opts, const std::string& out_path,
                 const std::string& data_out) {
    if (!data_out.empty()) {
        const SimulatedDataset d = simulate_design(t, 1, seed).front();
        Matrix both(t, SimulationStream::kPredictors + 1);
        both.leftCols(SimulationStream::kPredictors) = d.x.values;
        for (int i = 0; i < t; ++i) both(i, SimulationStream::kPredictors) = d.y[static_cast<std::size_t>(i)];
        std::vector<std::string> names = d.x.column_names;
        names.emplace_back("y");
        write_csv(data_out, DataMatrix(std::move(both), std::move(names)));
    }
    const SimulationSummary s = run_simulation_study(t, runs, seed, opts);
    std::printf("Simulation: T = %d, %d runs, seed %llu, CRSIR c = %d, tau = %g\n\n", t, runs,
                static_cast<unsigned long long>(seed), opts.clusters, opts.tau);
    std::printf("| Method | Mean RMSE | SD | Runs won |\n|---|---:|---:|---:|\n");
    std::printf("| CRSIR | %.4f | %.4f | %d |\n", s.crsir_mean, s.crsir_sd, s.crsir_wins);
    std::printf("| SIR | %.4f | %.4f | %d |\n", s.sir_mean, s.sir_sd, runs - s.crsir_wins);
    if (!out_path.empty()) {
        std::ofstream out = open_output(out_path);
        out << "run,crsir_rmse,sir_rmse\n";
        for (std::size_t r = 0; r < s.crsir_rmse.size(); ++r) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g\n", r + 1, s.crsir_rmse[r], s.sir_rmse[r]);
            out << buf;
        }
    }
    return 0;
}

int run_fit(const PanelArgs& args, const std::string& target, int horizon, const CrsirOptions& base,
            const std::string& out_path) {
    if (horizon < 0) throw DomainError("horizon must be non-negative");
    const PanelConfig cfg = args.resolve();
    const Panel panel = load_panel(cfg);
    const std::vector<Eigen::Index> cols = predictor_columns(panel, cfg, target);
    const std::vector<double> y_all = panel.target(target);
    const Eigen::Index rows = panel.series.rows() - horizon;
    if (rows < 2) throw TooShort("panel too short for the horizon");
    // Direct h-step pairs: predictors at t, target at t + h.
    const DataMatrix x = select(panel, cols, 0, rows);
    const std::vector<double> y(y_all.begin() + horizon, y_all.end());
    CrsirOptions opts = base;
    opts.slices = cfg.slices;
    opts.alpha = cfg.alpha;
    const CrsirModel model = crsir_fit(x, y, opts);
    save_model(out_path, model, {target, horizon});
    std::printf("fitted %zu predictors on %lld rows: %d clusters, %lld variates, tau %g -> %s\n", cols.size(),
                static_cast<long long>(rows), model.clusters, static_cast<long long>(model.variate_count()), model.tau,
                out_path.c_str());
    return 0;
}

int run_forecast(const std::string& model_path, const PanelArgs& args, const std::string& out_path) {
    ModelMetadata meta;
    const CrsirModel model = load_model(model_path, &meta);
    const PanelConfig cfg = args.resolve();
    const Panel panel = load_panel(cfg);
    std::vector<Eigen::Index> cols;
    for (const std::string& name : model.column_names) cols.push_back(panel.column(name));
    const Vector pred = model.predict(select(panel, cols, 0, panel.series.rows()).values);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file = open_output(out_path);
        out = &file;
    }
    *out << "row,prediction\n";
    for (Eigen::Index i = 0; i < pred.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%lld,%.17g\n", static_cast<long long>(i), pred(i));
        *out << buf;
    }
    return 0;
}

struct EvalArgs {
    std::vector<std::string> targets;
    std::vector<int> horizons;
    std::optional<int> window;
    std::optional<int> threads;
    std::optional<int> eval_start;
    std::optional<int> eval_end;
    std::vector<int> grid_c;
    std::vector<double> grid_tau;
    std::string out_dir = "report";
};

int run_evaluate(const PanelArgs& args, const EvalArgs& ev) {
    PanelConfig cfg = args.resolve();
    if (!ev.targets.empty()) cfg.forecast_targets = ev.targets;
    if (!ev.horizons.empty()) cfg.horizons = ev.horizons;
    if (ev.window) cfg.window_length = *ev.window;
    if (ev.threads) cfg.threads = *ev.threads;
    if (ev.eval_start) cfg.eval_start = *ev.eval_start;
    if (ev.eval_end) cfg.eval_end = *ev.eval_end;
    if (!ev.grid_c.empty()) cfg.cv_grid.clusters = ev.grid_c;
    if (!ev.grid_tau.empty()) cfg.cv_grid.taus = ev.grid_tau;
    cfg.validate();

    const Panel panel = load_panel(cfg);
    const EvalReport report = rolling_oos(panel, cfg);
    const std::filesystem::path dir = ev.out_dir;
    std::ofstream csv = open_output(dir / "report.csv");
    report.write_csv(csv);
    std::ofstream md = open_output(dir / "report.md");
    report.write_markdown(md);
    report.write_markdown(std::cout);
    if (panel.dropped_rows > 0) std::cerr << panel.dropped_rows << " incomplete rows dropped\n";
    return 0;
}

int run_cluster_report(const PanelArgs& args, int clusters, const std::string& out_path, std::string partition_path) {
    const PanelConfig cfg = args.resolve();
    const Panel panel = load_panel(cfg);
    const std::vector<Eigen::Index> cols = predictor_columns(panel, cfg, "");
    const DataMatrix x = select(panel, cols, 0, panel.series.rows());
    const Standardized st = standardize(x);
    const Dendrogram tree = complete_linkage_dendrogram(dissimilarity_matrix(correlation(st.data)));
    if (clusters < 1 || clusters > tree.leaf_count) {
        throw DomainError("cluster count " + std::to_string(clusters) + " outside [1, " +
                          std::to_string(tree.leaf_count) + "]");
    }
    const ClusterAssignment a = tree.cut(clusters);

    std::ofstream merges = open_output(out_path);
    merges << "step,left,right,height\n";
    for (const Merge& m : tree.merges) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g\n", m.step + 1, m.left, m.right, m.height);
        merges << buf;
    }
    if (partition_path.empty()) {
        std::filesystem::path p = out_path;
        partition_path = (p.parent_path() / (p.stem().string() + "_partition.csv")).string();
    }
    std::ofstream part = open_output(partition_path);
    part << "variable,name,cluster,processing_rank\n";
    std::vector<int> rank(static_cast<std::size_t>(a.cluster_count()));
    for (std::size_t k = 0; k < a.order.size(); ++k) rank[static_cast<std::size_t>(a.order[k])] = static_cast<int>(k);
    for (std::size_t j = 0; j < a.labels.size(); ++j) {
        part << j << ',' << x.column_names[j] << ',' << a.labels[j] << ',' << rank[static_cast<std::size_t>(a.labels[j])]
             << '\n';
    }
    std::printf("%zu variables, %d clusters; merges -> %s, partition -> %s\n", a.labels.size(), a.cluster_count(),
                out_path.c_str(), partition_path.c_str());
    for (int id : a.order) {
        std::printf("cluster %d:", id);
        for (int v : a.members(id)) std::printf(" %s", x.column_names[static_cast<std::size_t>(v)].c_str());
        std::printf("\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cluster-based regularized sliced inverse regression"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "equicorrelated benchmark: CRSIR versus SIR in-sample RMSE");
    int sim_t = 300;
    int sim_runs = 100;
    std::uint64_t sim_seed = 42;
    CrsirOptions sim_opts{10, 0.5, 0, 0.05};
    std::string sim_out;
    std::string sim_data;
    sim->add_option("-T,--observations", sim_t, "observations per run")->capture_default_str();
    sim->add_option("--runs", sim_runs, "number of runs")->capture_default_str();
    sim->add_option("--seed", sim_seed, "generator seed")->capture_default_str();
    sim->add_option("-c,--clusters", sim_opts.clusters, "CRSIR cluster count")->capture_default_str();
    sim->add_option("--tau", sim_opts.tau, "CRSIR shrinkage")->capture_default_str();
    sim->add_option("-H,--slices", sim_opts.slices, "slice count, 0 for automatic")->capture_default_str();
    sim->add_option("--alpha", sim_opts.alpha, "level of the dimension test")->capture_default_str();
    sim->add_option("--out", sim_out, "per-run RMSE CSV");
    sim->add_option("--data-out", sim_data, "write the first simulated dataset as CSV");

    auto* fit = app.add_subcommand("fit", "fit a CRSIR model and save it");
    PanelArgs fit_panel;
    fit_panel.attach(fit);
    std::string fit_target;
    int fit_h = 0;
    CrsirOptions fit_opts{1, 0.0, 0, 0.05};
    std::string fit_out = "model.json";
    fit->add_option("--target", fit_target, "response series")->required();
    fit->add_option("--horizon", fit_h, "pair predictors at t with the target at t + h")->capture_default_str();
    fit->add_option("-c,--clusters", fit_opts.clusters, "cluster count")->capture_default_str();
    fit->add_option("--tau", fit_opts.tau, "shrinkage toward the scaled identity")->capture_default_str();
    fit->add_option("-o,--out", fit_out, "model file")->capture_default_str();

    auto* fc = app.add_subcommand("forecast", "predict from a saved model");
    PanelArgs fc_panel;
    fc_panel.attach(fc);
    std::string fc_model;
    std::string fc_out;
    fc->add_option("--model", fc_model, "model file")->required();
    fc->add_option("-o,--out", fc_out, "prediction CSV (default stdout)");

    auto* ev = app.add_subcommand("evaluate", "rolling pseudo out-of-sample comparison with AR(4) and DFM-5");
    PanelArgs ev_panel;
    ev_panel.attach(ev);
    EvalArgs ev_args;
    ev->add_option("--targets", ev_args.targets, "series to forecast");
    ev->add_option("--horizons", ev_args.horizons, "forecast horizons");
    ev->add_option("--window", ev_args.window, "rolling window length");
    ev->add_option("--threads", ev_args.threads, "worker threads");
    ev->add_option("--eval-start", ev_args.eval_start, "first forecast origin row");
    ev->add_option("--eval-end", ev_args.eval_end, "last forecast origin row");
    ev->add_option("--grid-c", ev_args.grid_c, "cluster counts to cross-validate");
    ev->add_option("--grid-tau", ev_args.grid_tau, "shrinkage values to cross-validate");
    ev->add_option("--out-dir", ev_args.out_dir, "directory for report.csv and report.md")->capture_default_str();

    auto* cr = app.add_subcommand("cluster-report", "complete-linkage dendrogram and partition of the predictors");
    PanelArgs cr_panel;
    cr_panel.attach(cr);
    int cr_c = 1;
    std::string cr_out = "dendrogram.csv";
    std::string cr_partition;
    cr->add_option("-c,--clusters", cr_c, "clusters in the reported partition")->capture_default_str();
    cr->add_option("-o,--out", cr_out, "merge list CSV")->capture_default_str();
    cr->add_option("--partition-out", cr_partition, "partition CSV (default: <out stem>_partition.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (sim->parsed()) return run_simulate(sim_t, sim_runs, sim_seed, sim_opts, sim_out, sim_data);
        if (fit->parsed()) return run_fit(fit_panel, fit_target, fit_h, fit_opts, fit_out);
        if (fc->parsed()) return run_forecast(fc_model, fc_panel, fc_out);
        if (ev->parsed()) return run_evaluate(ev_panel, ev_args);
        if (cr->parsed()) return run_cluster_report(cr_panel, cr_c, cr_out, cr_partition);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}
