#pragma once

#include "crsir/crsir.hpp"
#include "crsir/panel.hpp"

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace crsir {

/// sqrt(mean((pred - obs)^2)).
double rmse(std::span<const double> pred, std::span<const double> obs);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::vector<double> values, double p);

/// A rolling window after partialling out the autoregressive terms.
///
/// Pair i couples x_t with y_{t+h} for the n = W - h dates t of the window whose target is
/// observed by the origin. Both sides are residuals from least squares on
/// (1, y_t, y_{t-1}, y_{t-2}, y_{t-3}) over the window.
struct ResidualizedWindow {
    Matrix x_tilde;
    std::vector<double> y_tilde;
    /// Coefficients of y_{t+h} on the lag design (the direct AR(4) fit).
    Vector y_coef;
    /// Column j holds the lag-design coefficients of predictor j.
    Matrix x_coef;
    /// Lag design row at the origin, intercept first.
    Vector origin_lags;
    /// Residualized predictors at the origin.
    Vector origin_x_tilde;
    bool rank_deficient = false;

    [[nodiscard]] double ar_forecast() const { return y_coef.dot(origin_lags); }
};

/// `x_hist` and `y_hist` hold rows 0..t0, where t0 is the forecast origin; only the last
/// `window` rows (plus three earlier lags) are read.
ResidualizedWindow residualize_window(const Matrix& x_hist, std::span<const double> y_hist, int horizon, int window);

/// 1-based training dates for held-out date `i` of `n`: {1..i-2h-3} and {i+2h+3..n}.
std::vector<int> training_indices(int i, int n, int horizon);

struct CvOptions {
    int slices = 0;
    double alpha = 0.05;
    /// A grid point failing on more than this share of held-out dates is disqualified.
    double max_failure_share = 0.10;
};

struct GridScore {
    int clusters = 0;
    double tau = 0.0;
    double loss = 0.0;
    int evaluated = 0;
    int failures = 0;
    bool qualified = false;
};

struct CvResult {
    int clusters = 0;
    double tau = 0.0;
    std::vector<GridScore> scores;
};

/// Picks (c, tau) minimizing the mean squared error of held-out residual forecasts.
/// Losses equal to 1e-12 relative prefer the smaller c, then the larger tau.
CvResult cross_validate(const ResidualizedWindow& window, int horizon, const CvGrid& grid, const CvOptions& options);

CvResult cross_validate(const Matrix& x_hist, std::span<const double> y_hist, int horizon, const CvGrid& grid,
                        int window, const CvOptions& options);

/// Forecasts of y_{t0+h} made at origin t0 from rows 0..t0 only.
struct OriginForecast {
    double ar4 = 0.0;
    double dfm5 = 0.0;
    double crsir = 0.0;
    bool ar4_ok = false;
    bool dfm5_ok = false;
    bool crsir_ok = false;
    int clusters = 0;
    double tau = 0.0;
    std::string error;
};

OriginForecast forecast_origin(const Matrix& x_hist, std::span<const double> y_hist, int horizon,
                               const PanelConfig& config);

/// Forecasts and realizations for one (series, horizon) pair over all evaluation dates.
struct SeriesForecasts {
    std::string series;
    int horizon = 0;
    std::vector<int> origins;
    std::vector<OriginForecast> forecasts;
    std::vector<double> observed;
};

inline const std::array<std::string, 3> kMethods{"AR(4)", "DFM-5", "CRSIR"};
inline constexpr std::array<double, 5> kPercentiles{0.05, 0.25, 0.50, 0.75, 0.95};

struct EvalRecord {
    std::string series;
    int horizon = 0;
    std::string method;
    double rmse = 0.0;
    double relative_rmse = 0.0;
    int chosen_clusters = 0;
    double chosen_tau = 0.0;
    int forecasts = 0;
    int failures = 0;
    bool ok = false;
    std::string note;
};

struct HorizonSummary {
    int horizon = 0;
    /// Rows follow kMethods, columns follow kPercentiles.
    std::array<std::array<double, 5>, 3> percentiles{};
    /// Series with relative RMSE below 1, per method.
    std::array<int, 3> beats_ar4{};
    int series = 0;
};

struct EvalReport {
    std::vector<EvalRecord> records;
    std::vector<HorizonSummary> summaries;
    std::string test_description;

    void write_csv(std::ostream& out) const;
    void write_markdown(std::ostream& out) const;
};

/// Scores every series on the dates where all three methods produced a forecast.
EvalReport summarize(const std::vector<SeriesForecasts>& series, const PanelConfig& config);

/// First forecast origin honoured by `rolling_oos`.
int first_origin(const PanelConfig& config);

/// Runs the rolling evaluation for every target and horizon. Failures are recorded per
/// origin and never abort the batch.
std::vector<SeriesForecasts> collect_forecasts(const Panel& panel, const PanelConfig& config);

EvalReport rolling_oos(const Panel& panel, const PanelConfig& config);

}  // namespace crsir
