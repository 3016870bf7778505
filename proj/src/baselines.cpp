#include "crsir/baselines.hpp"

#include "crsir/errors.hpp"

#include <cmath>

namespace crsir {

namespace {

Matrix with_intercept(const Matrix& design) {
    Matrix out(design.rows(), design.cols() + 1);
    out.col(0).setOnes();
    out.rightCols(design.cols()) = design;
    return out;
}

std::string describe(Eigen::Index regressors) { return "intercept + " + std::to_string(regressors) + " regressors"; }

void check_rows(const Matrix& design, std::span<const double> target) {
    if (static_cast<std::size_t>(design.rows()) != target.size()) {
        throw LengthMismatch("design rows and target length differ");
    }
    if (design.rows() < design.cols() + 1) throw TooShort("fewer rows than coefficients");
}

}  // namespace

double LinearForecaster::predict(const Eigen::Ref<const Vector>& regressors) const {
    if (regressors.size() + 1 != coefficients.size()) throw DimensionMismatch("regressor count does not match fit");
    return coefficients(0) + coefficients.tail(regressors.size()).dot(regressors);
}

LinearForecaster ols(const Matrix& design, std::span<const double> target) {
    check_rows(design, target);
    const Matrix x = with_intercept(design);
    Eigen::ColPivHouseholderQR<Matrix> qr(x);
    qr.setThreshold(1e-10);
    if (qr.rank() < x.cols()) throw RankDeficient("design matrix has rank " + std::to_string(qr.rank()) +
                                                  " < " + std::to_string(x.cols()));
    const Eigen::Map<const Vector> y(target.data(), static_cast<Eigen::Index>(target.size()));
    return {qr.solve(y), describe(design.cols())};
}

LinearForecaster ols_min_norm(const Matrix& design, std::span<const double> target, bool& rank_deficient) {
    check_rows(design, target);
    const Matrix x = with_intercept(design);
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(x);
    cod.setThreshold(1e-10);
    rank_deficient = cod.rank() < x.cols();
    const Eigen::Map<const Vector> y(target.data(), static_cast<Eigen::Index>(target.size()));
    return {cod.solve(y), describe(design.cols())};
}

Matrix ar_lags(std::span<const double> y, Eigen::Index first, Eigen::Index last) {
    if (first < kArOrder - 1) throw TooShort("autoregressive lags reach before the first observation");
    if (last >= static_cast<Eigen::Index>(y.size()) || last < first - 1) throw DomainError("lag range outside the series");
    Matrix out(last - first + 1, kArOrder);
    for (Eigen::Index t = first; t <= last; ++t) {
        for (int l = 0; l < kArOrder; ++l) out(t - first, l) = y[static_cast<std::size_t>(t - l)];
    }
    return out;
}

PointForecast ar4_forecast(std::span<const double> y, int horizon) {
    if (horizon < 1) throw DomainError("forecast horizon must be positive");
    const auto n = static_cast<Eigen::Index>(y.size());
    // Pairs (t, t + h) with t - 3 >= 0 and t + h <= n - 1.
    const Eigen::Index first = kArOrder - 1;
    const Eigen::Index last = n - 1 - horizon;
    if (last - first + 1 < kMinUsableRows) {
        throw TooShort("AR(4) needs " + std::to_string(kMinUsableRows) + " usable rows, series gives " +
                       std::to_string(std::max<Eigen::Index>(0, last - first + 1)));
    }
    const Matrix design = ar_lags(y, first, last);
    const std::span<const double> target = y.subspan(static_cast<std::size_t>(first + horizon));
    PointForecast out;
    const LinearForecaster fit = ols_min_norm(design, target, out.fallback);
    out.value = fit.predict(ar_lags(y, n - 1, n - 1).row(0).transpose());
    return out;
}

PcaFactors pca_factors(const DataMatrix& standardized, int factors) {
    const Eigen::Index n = standardized.cols();
    if (factors < 1 || factors > std::min(standardized.rows(), n)) {
        throw DomainError("factor count " + std::to_string(factors) + " outside [1, min(T, N)]");
    }
    const EigenResult eig = sym_eigen(covariance(standardized.values));
    PcaFactors out;
    out.eigenvalues = eig.eigenvalues;
    out.loadings = eig.eigenvectors.leftCols(factors);
    out.scores = standardized.values * out.loadings;
    return out;
}

PointForecast dfm_forecast(const DataMatrix& x, std::span<const double> y, int horizon, int factors) {
    if (horizon < 1) throw DomainError("forecast horizon must be positive");
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw LengthMismatch("panel rows and target length differ");
    if (x.cols() < factors) throw DomainError("factor model needs at least as many series as factors");
    const auto n = static_cast<Eigen::Index>(y.size());
    const Eigen::Index first = kArOrder - 1;
    const Eigen::Index last = n - 1 - horizon;
    if (last - first + 1 < kMinUsableRows) throw TooShort("factor forecast needs more usable rows");

    const PcaFactors pca = pca_factors(standardize(x).data, factors);
    const Eigen::Index rows = last - first + 1;
    Matrix design(rows, kArOrder + factors);
    design.leftCols(kArOrder) = ar_lags(y, first, last);
    design.rightCols(factors) = pca.scores.middleRows(first, rows);

    PointForecast out;
    const LinearForecaster fit = ols_min_norm(design, y.subspan(static_cast<std::size_t>(first + horizon)), out.fallback);
    Vector at(kArOrder + factors);
    at.head(kArOrder) = ar_lags(y, n - 1, n - 1).row(0).transpose();
    at.tail(factors) = pca.scores.row(n - 1).transpose();
    out.value = fit.predict(at);
    return out;
}

}  // namespace crsir
