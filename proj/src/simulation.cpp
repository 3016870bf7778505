#include "crsir/simulation.hpp"

#include "crsir/errors.hpp"
#include "crsir/evaluation.hpp"

#include <cmath>
#include <numeric>

namespace crsir {

Matrix SimulationStream::design_covariance() {
    Matrix sigma = Matrix::Constant(kPredictors, kPredictors, kCorrelation);
    sigma.diagonal().setOnes();
    return sigma;
}

SimulationStream::SimulationStream(int observations, std::uint64_t seed)
    : observations_(observations), rng_(seed) {
    if (observations < 50) throw DomainError("simulation needs at least 50 observations");
    Eigen::LLT<Matrix> llt(design_covariance());
    chol_ = llt.matrixL();
}

SimulatedDataset SimulationStream::next() {
    const double noise_sd = std::sqrt(kNoiseVariance);
    Matrix x(observations_, kPredictors);
    std::vector<double> y(static_cast<std::size_t>(observations_));
    Vector z(kPredictors);
    for (int i = 0; i < observations_; ++i) {
        for (int j = 0; j < kPredictors; ++j) z(j) = rng_.normal();
        x.row(i) = (chol_ * z).transpose();
        double v = 0.0;
        for (int j = 0; j < kPredictors; ++j) v += static_cast<double>(j + 1) * x(i, j);
        y[static_cast<std::size_t>(i)] = v + noise_sd * rng_.normal();
    }
    return {DataMatrix(std::move(x)), std::move(y)};
}

std::vector<SimulatedDataset> simulate_design(int observations, int runs, std::uint64_t seed) {
    SimulationStream stream(observations, seed);
    std::vector<SimulatedDataset> out;
    out.reserve(static_cast<std::size_t>(std::max(runs, 0)));
    for (int r = 0; r < runs; ++r) out.push_back(stream.next());
    return out;
}

namespace {

void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
}

double in_sample_rmse(const SimulatedDataset& d, const CrsirOptions& options) {
    const CrsirModel model = crsir_fit(d.x, d.y, options);
    const Vector pred = model.predict(d.x.values);
    return rmse({pred.data(), static_cast<std::size_t>(pred.size())}, d.y);
}

}  // namespace

SimulationSummary run_simulation_study(int observations, int runs, std::uint64_t seed, const CrsirOptions& options) {
    if (runs < 1) throw DomainError("simulation needs at least one run");
    SimulationStream stream(observations, seed);
    CrsirOptions sir = options;
    sir.clusters = 1;
    sir.tau = 0.0;
    SimulationSummary out;
    for (int r = 0; r < runs; ++r) {
        const SimulatedDataset d = stream.next();
        out.crsir_rmse.push_back(in_sample_rmse(d, options));
        out.sir_rmse.push_back(in_sample_rmse(d, sir));
        if (out.crsir_rmse.back() < out.sir_rmse.back()) ++out.crsir_wins;
    }
    mean_sd(out.crsir_rmse, out.crsir_mean, out.crsir_sd);
    mean_sd(out.sir_rmse, out.sir_mean, out.sir_sd);
    return out;
}

}  // namespace crsir
