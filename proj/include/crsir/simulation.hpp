#pragma once

#include "crsir/crsir.hpp"
#include "crsir/numerics.hpp"
#include "crsir/random.hpp"

#include <cstdint>
#include <vector>

namespace crsir {

struct SimulatedDataset {
    DataMatrix x;
    std::vector<double> y;
};

/// Equicorrelated benchmark design: ten N(0, Sigma) predictors with unit variances and
/// 0.9 correlations, y = sum_j j * x_j + e with Var(e) = 0.1.
///
/// Each call to `next()` draws one run from a single seeded stream, so a seed fixes the
/// whole sequence of datasets.
class SimulationStream {
public:
    static constexpr int kPredictors = 10;
    static constexpr double kCorrelation = 0.9;
    static constexpr double kNoiseVariance = 0.1;

    SimulationStream(int observations, std::uint64_t seed);

    SimulatedDataset next();

    [[nodiscard]] static Matrix design_covariance();

private:
    int observations_;
    Rng rng_;
    Matrix chol_;
};

/// Fixed-size batch of runs from one stream.
std::vector<SimulatedDataset> simulate_design(int observations, int runs, std::uint64_t seed);

struct SimulationSummary {
    std::vector<double> crsir_rmse;
    std::vector<double> sir_rmse;
    double crsir_mean = 0.0;
    double crsir_sd = 0.0;
    double sir_mean = 0.0;
    double sir_sd = 0.0;
    int crsir_wins = 0;
};

/// In-sample RMSE of CRSIR at `options` versus plain SIR (one cluster, tau = 0) over `runs`
/// simulated datasets.
SimulationSummary run_simulation_study(int observations, int runs, std::uint64_t seed, const CrsirOptions& options);

}  // namespace crsir
