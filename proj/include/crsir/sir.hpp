#pragma once

#include "crsir/numerics.hpp"

#include <span>
#include <vector>

namespace crsir {

/// Equal-count partition of the observations by response value.
struct SliceSpec {
    /// Largest response value in each slice except the last.
    std::vector<double> boundaries;
    /// Slice id of every observation, in the original observation order.
    std::vector<int> membership;
    std::vector<double> proportions;

    [[nodiscard]] int slice_count() const noexcept { return static_cast<int>(proportions.size()); }
};

/// Estimated e.d.r. directions from one SIR pass.
struct EdrBasis {
    /// p-by-k, leading k generalized eigenvectors; b' Sigma(tau) b = 1.
    Matrix directions;
    /// All min(p, H - 1) eigenvalues, non-increasing.
    Vector eigenvalues;
    int k = 0;
};

struct SirOptions {
    int slices = 10;
    double tau = 0.0;
    double alpha = 0.05;
};

/// Default slice count min(10, floor(T / 4)), never below 2.
int default_slice_count(Eigen::Index observations);

/// Stable sort by response, then contiguous groups whose sizes differ by at most one
/// (larger groups first).
SliceSpec make_slices(std::span<const double> y, int slices);

/// Sum over slices of p_h m_h m_h' for centered X.
SymMatrix slice_mean_covariance(const Matrix& x, const SliceSpec& slices);

/// Smallest k whose trailing-eigenvalue chi-square test T * sum_{j>k} nu_j on
/// (p - k)(H - k - 1) degrees of freedom is not rejected at `alpha`, floored at 1.
int select_dimension(std::span<const double> eigenvalues, Eigen::Index observations, Eigen::Index predictors,
                     int slices, double alpha);

/// Tau-independent ingredients of a SIR fit: the between-slice covariance and the
/// eigendecomposition of the total covariance. Regularization keeps the eigenvectors, so
/// one decomposition serves every tau.
struct SirMoments {
    SymMatrix between;
    EigenResult total;
    Eigen::Index observations = 0;
    int slices = 0;
};

SirMoments sir_moments(const Matrix& x, const SliceSpec& slices);

EdrBasis sir_fit(const SirMoments& moments, double tau, double alpha);
EdrBasis sir_fit(const Matrix& x, std::span<const double> y, const SirOptions& options);
EdrBasis sir_fit(const Matrix& x, std::span<const double> y, const SliceSpec& slices, const SirOptions& options);

}  // namespace crsir
