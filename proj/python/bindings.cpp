#include "crsir/baselines.hpp"
#include "crsir/clustering.hpp"
#include "crsir/crsir.hpp"
#include "crsir/errors.hpp"
#include "crsir/evaluation.hpp"
#include "crsir/model_io.hpp"
#include "crsir/panel.hpp"
#include "crsir/simulation.hpp"
#include "crsir/sir.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace crsir;

namespace {

DataMatrix as_data(const Matrix& x, std::vector<std::string> names) {
    if (names.empty()) return DataMatrix(x);
    return DataMatrix(x, std::move(names));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cluster-based regularized sliced inverse regression";

    auto base = py::register_exception<Error>(m, "CrsirError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
    py::register_exception<LengthMismatch>(m, "LengthMismatch", base.ptr());

    m.def(
        "standardize",
        [](const Matrix& x) {
            const Standardized s = standardize(DataMatrix(x));
            return py::make_tuple(s.data.values, s.params.mean, s.params.sd);
        },
        py::arg("x"), "Returns (z, mean, sd); z has zero-mean, unit-variance columns.");
    m.def("correlation", [](const Matrix& x) { return correlation(DataMatrix(x)).values(); }, py::arg("x"));
    m.def(
        "regularize_covariance", [](const Matrix& s, double tau) { return regularize_covariance(SymMatrix(s), tau).values(); },
        py::arg("s"), py::arg("tau"));

    py::class_<ClusterAssignment>(m, "ClusterAssignment")
        .def_readonly("labels", &ClusterAssignment::labels)
        .def_readonly("order", &ClusterAssignment::order)
        .def("members", &ClusterAssignment::members, py::arg("cluster"))
        .def_property_readonly("cluster_count", &ClusterAssignment::cluster_count);
    m.def(
        "cluster_variables",
        [](const Matrix& x, int c) {
            const Standardized s = standardize(DataMatrix(x));
            return complete_linkage_cluster(dissimilarity_matrix(correlation(s.data)), c);
        },
        py::arg("x"), py::arg("clusters"), "Complete-linkage clustering of columns on 1 - |corr|.");

    py::class_<EdrBasis>(m, "EdrBasis")
        .def_readonly("directions", &EdrBasis::directions)
        .def_readonly("eigenvalues", &EdrBasis::eigenvalues)
        .def_readonly("k", &EdrBasis::k);
    m.def(
        "sir_fit",
        [](const Matrix& x, const std::vector<double>& y, int slices, double tau, double alpha) {
            return sir_fit(x, y, SirOptions{slices, tau, alpha});
        },
        py::arg("x"), py::arg("y"), py::arg("slices") = 10, py::arg("tau") = 0.0, py::arg("alpha") = 0.05);

    py::class_<CrsirModel>(m, "CrsirModel")
        .def_readonly("column_names", &CrsirModel::column_names)
        .def_readonly("block_dims", &CrsirModel::block_dims)
        .def_readonly("orthogonalizer", &CrsirModel::orthogonalizer)
        .def_readonly("lambda_", &CrsirModel::lambda)
        .def_readonly("gamma", &CrsirModel::gamma)
        .def_readonly("head", &CrsirModel::head)
        .def_readonly("tau", &CrsirModel::tau)
        .def_readonly("clusters", &CrsirModel::clusters)
        .def_readonly("slices", &CrsirModel::slices)
        .def_readonly("alpha", &CrsirModel::alpha)
        .def_property_readonly("labels", [](const CrsirModel& model) { return model.assignment.labels; })
        .def_property_readonly("variate_count", &CrsirModel::variate_count)
        .def("transform", &CrsirModel::transform, py::arg("x"))
        .def("predict", &CrsirModel::predict, py::arg("x"))
        .def("save", [](const CrsirModel& model, const std::filesystem::path& path) { save_model(path, model); },
             py::arg("path"))
        .def("to_json", [](const CrsirModel& model) { return model_to_json(model); })
        .def_static("load", [](const std::filesystem::path& path) { return load_model(path); }, py::arg("path"))
        .def_static("from_json", [](const std::string& text) { return model_from_json(text); }, py::arg("text"));
    m.def(
        "crsir_fit",
        [](const Matrix& x, const std::vector<double>& y, int clusters, double tau, int slices, double alpha,
           std::vector<std::string> names) {
            return crsir_fit(as_data(x, std::move(names)), y, CrsirOptions{clusters, tau, slices, alpha});
        },
        py::arg("x"), py::arg("y"), py::arg("clusters") = 1, py::arg("tau") = 0.0, py::arg("slices") = 0,
        py::arg("alpha") = 0.05, py::arg("names") = std::vector<std::string>{},
        "Fit the full pipeline; slices = 0 picks the default count.");

    m.def(
        "ar4_forecast",
        [](const std::vector<double>& y, int horizon) {
            const PointForecast f = ar4_forecast(y, horizon);
            return py::make_tuple(f.value, f.fallback);
        },
        py::arg("y"), py::arg("horizon"), "Direct AR(4) forecast of y[T-1+h]; returns (value, fallback).");
    m.def(
        "dfm5_forecast",
        [](const Matrix& x, const std::vector<double>& y, int horizon) {
            const PointForecast f = dfm5_forecast(standardize(DataMatrix(x)).data, y, horizon);
            return py::make_tuple(f.value, f.fallback);
        },
        py::arg("x"), py::arg("y"), py::arg("horizon"),
        "Diffusion-index forecast with five principal-component factors of standardized x.");

    m.def(
        "simulate_design",
        [](int observations, int runs, std::uint64_t seed) {
            py::list out;
            for (const SimulatedDataset& d : simulate_design(observations, runs, seed)) {
                out.append(py::make_tuple(d.x.values, d.y));
            }
            return out;
        },
        py::arg("observations") = 300, py::arg("runs") = 1, py::arg("seed") = 42,
        "List of (x, y) benchmark datasets from one seeded stream.");

    m.def(
        "evaluate_panel",
        [](const Matrix& x, std::vector<std::string> names, const std::string& config_json) {
            PanelConfig cfg = parse_config(config_json.empty() ? "{}" : config_json);
            cfg.validate();
            const EvalReport report = rolling_oos(Panel{DataMatrix(x, std::move(names)), 0}, cfg);
            std::ostringstream csv;
            std::ostringstream md;
            report.write_csv(csv);
            report.write_markdown(md);
            return py::make_tuple(csv.str(), md.str());
        },
        py::arg("x"), py::arg("names"), py::arg("config_json") = "",
        "Rolling out-of-sample comparison on an already-transformed panel; returns (csv, markdown).");
}
