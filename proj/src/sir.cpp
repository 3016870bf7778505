#include "crsir/sir.hpp"

#include "crsir/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crsir {

int default_slice_count(Eigen::Index observations) {
    return static_cast<int>(std::max<Eigen::Index>(2, std::min<Eigen::Index>(10, observations / 4)));
}

SliceSpec make_slices(std::span<const double> y, int slices) {
    if (slices < 1) throw DomainError("slice count must be positive");
    const auto t = y.size();
    if (t < 2 * static_cast<std::size_t>(slices)) {
        throw TooFewObservations("slicing " + std::to_string(t) + " observations into " + std::to_string(slices) +
                                 " slices needs at least " + std::to_string(2 * slices));
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw DomainError("response contains a non-finite value");
    }
    std::vector<std::size_t> idx(t);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

    const auto h = static_cast<std::size_t>(slices);
    const std::size_t base = t / h;
    const std::size_t extra = t % h;
    SliceSpec out;
    out.membership.assign(t, 0);
    out.proportions.reserve(h);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < h; ++s) {
        const std::size_t size = base + (s < extra ? 1 : 0);
        for (std::size_t k = 0; k < size; ++k) out.membership[idx[pos + k]] = static_cast<int>(s);
        pos += size;
        if (s + 1 < h) out.boundaries.push_back(y[idx[pos - 1]]);
        out.proportions.push_back(static_cast<double>(size) / static_cast<double>(t));
    }
    return out;
}

SymMatrix slice_mean_covariance(const Matrix& x, const SliceSpec& slices) {
    if (static_cast<std::size_t>(x.rows()) != slices.membership.size()) {
        throw DimensionMismatch("slice membership length does not match observation count");
    }
    const int h = slices.slice_count();
    Matrix sums = Matrix::Zero(h, x.cols());
    std::vector<double> counts(static_cast<std::size_t>(h), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int s = slices.membership[static_cast<std::size_t>(i)];
        sums.row(s) += x.row(i);
        counts[static_cast<std::size_t>(s)] += 1.0;
    }
    // Rows scaled by sqrt(p_h) so that M = S' S.
    for (int s = 0; s < h; ++s) {
        const double c = counts[static_cast<std::size_t>(s)];
        if (c > 0.0) sums.row(s) *= std::sqrt(slices.proportions[static_cast<std::size_t>(s)]) / c;
    }
    Matrix m = sums.transpose() * sums;
    m.triangularView<Eigen::StrictlyUpper>() = m.transpose().triangularView<Eigen::StrictlyUpper>();
    return SymMatrix::trusted(std::move(m));
}

int select_dimension(std::span<const double> eigenvalues, Eigen::Index observations, Eigen::Index predictors,
                     int slices, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("test level alpha must lie in (0, 1)");
    const auto limit = static_cast<int>(std::min<Eigen::Index>(predictors, slices - 1));
    const int len = std::min(limit, static_cast<int>(eigenvalues.size()));
    if (len <= 0) return 1;
    const auto t = static_cast<double>(observations);
    const auto p = static_cast<int>(predictors);
    for (int k = 0; k < len; ++k) {
        double tail = 0.0;
        for (int j = k; j < len; ++j) tail += std::max(0.0, eigenvalues[static_cast<std::size_t>(j)]);
        const int df = (p - k) * (slices - k - 1);
        if (df < 1) return std::max(k, 1);
        if (chi_square_sf(t * tail, df) > alpha) return std::max(k, 1);
    }
    return len;
}

SirMoments sir_moments(const Matrix& x, const SliceSpec& slices) {
    if (x.cols() < 1) throw DomainError("SIR needs at least one predictor");
    const Matrix centered = x.rowwise() - x.colwise().mean();
    SirMoments out;
    out.between = slice_mean_covariance(centered, slices);
    out.total = sym_eigen(covariance(centered));
    out.observations = x.rows();
    out.slices = slices.slice_count();
    return out;
}

EdrBasis sir_fit(const SirMoments& moments, double tau, double alpha) {
    const EigenResult eig = generalized_eigen(moments.between, regularize_spectrum(moments.total, tau));
    const Eigen::Index p = moments.between.size();
    const int h = moments.slices;
    const auto keep = std::min<Eigen::Index>(p, std::max(h - 1, 1));
    EdrBasis out;
    out.eigenvalues = eig.eigenvalues.head(keep);
    out.k = select_dimension({out.eigenvalues.data(), static_cast<std::size_t>(keep)}, moments.observations, p, h,
                             alpha);
    out.directions = eig.eigenvectors.leftCols(out.k);
    return out;
}

EdrBasis sir_fit(const Matrix& x, std::span<const double> y, const SliceSpec& slices, const SirOptions& options) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw LengthMismatch("predictor rows and response length differ");
    if (!(options.tau >= 0.0 && options.tau <= 1.0)) throw DomainError("shrinkage tau must lie in [0, 1]");
    return sir_fit(sir_moments(x, slices), options.tau, options.alpha);
}

EdrBasis sir_fit(const Matrix& x, std::span<const double> y, const SirOptions& options) {
    return sir_fit(x, y, make_slices(y, options.slices), options);
}

}  // namespace crsir
