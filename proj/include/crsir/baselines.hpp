#pragma once

#include "crsir/numerics.hpp"

#include <span>
#include <string>

namespace crsir {

/// Intercept followed by one slope per regressor.
struct LinearForecaster {
    Vector coefficients;
    std::string design_spec;

    [[nodiscard]] double predict(const Eigen::Ref<const Vector>& regressors) const;
};

/// Ordinary least squares of `target` on [1, design]. Throws RankDeficient.
LinearForecaster ols(const Matrix& design, std::span<const double> target);

/// Least squares of `target` on [1, design] that tolerates rank deficiency by taking the
/// minimum-norm solution. `rank_deficient` reports whether that happened.
LinearForecaster ols_min_norm(const Matrix& design, std::span<const double> target, bool& rank_deficient);

struct PointForecast {
    double value = 0.0;
    /// The lag design was rank deficient; the minimum-norm fit was used.
    bool fallback = false;
};

inline constexpr int kArOrder = 4;
inline constexpr int kMinUsableRows = 30;
inline constexpr int kDefaultFactors = 5;

/// Regressor rows (1 omitted) y_t, ..., y_{t-3} for t = first..last (inclusive), 0-based.
Matrix ar_lags(std::span<const double> y, Eigen::Index first, Eigen::Index last);

/// Direct h-step AR(4): regress y_{t+h} on (1, y_t, ..., y_{t-3}) over the series and
/// evaluate at the last observation.
PointForecast ar4_forecast(std::span<const double> y, int horizon);

struct PcaFactors {
    /// T-by-r factor scores X V_r.
    Matrix scores;
    /// N-by-r leading eigenvectors of the correlation matrix.
    Matrix loadings;
    /// All N eigenvalues, non-increasing.
    Vector eigenvalues;
};

/// Principal-component factors of standardized X. Each loading vector has its
/// largest-magnitude entry positive.
PcaFactors pca_factors(const DataMatrix& standardized, int factors);

/// Diffusion-index forecast: y_{t+h} on (1, four own lags, r factor scores at t).
/// X is standardized internally over its rows.
PointForecast dfm_forecast(const DataMatrix& x, std::span<const double> y, int horizon,
                           int factors = kDefaultFactors);

inline PointForecast dfm5_forecast(const DataMatrix& x, std::span<const double> y, int horizon) {
    return dfm_forecast(x, y, horizon, kDefaultFactors);
}

}  // namespace crsir
