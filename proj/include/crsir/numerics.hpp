#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace crsir {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// T-by-N observation matrix, rows are time points and columns are variables.
struct DataMatrix {
    Matrix values;
    std::vector<std::string> column_names;

    DataMatrix() = default;
    explicit DataMatrix(Matrix v);
    DataMatrix(Matrix v, std::vector<std::string> names);

    [[nodiscard]] Eigen::Index rows() const noexcept { return values.rows(); }
    [[nodiscard]] Eigen::Index cols() const noexcept { return values.cols(); }

    /// Throws unless T >= 2, N >= 1, every entry is finite and the name count matches.
    void validate() const;
};

/// Real symmetric matrix. Construction checks symmetry at 1e-12 relative.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(Matrix values);

    [[nodiscard]] const Matrix& values() const noexcept { return values_; }
    [[nodiscard]] Eigen::Index size() const noexcept { return values_.rows(); }
    [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

    /// Wraps without the symmetry check. Callers guarantee exact symmetry.
    static SymMatrix trusted(Matrix values);

private:
    Matrix values_;
};

/// Eigenvalues in non-increasing order; column k of `eigenvectors` pairs with eigenvalue k.
struct EigenResult {
    Vector eigenvalues;
    Matrix eigenvectors;
};

/// Per-column location and scale recorded by `standardize`.
struct StandardizationParams {
    Vector mean;
    Vector sd;

    /// Applies the stored centering and scaling to rows of `x`.
    [[nodiscard]] Matrix apply(const Matrix& x) const;
};

struct Standardized {
    DataMatrix data;
    StandardizationParams params;
};

Standardized standardize(const DataMatrix& x);

/// Unbiased sample covariance (divisor T-1).
SymMatrix covariance(const DataMatrix& x);
SymMatrix covariance(const Matrix& x);
SymMatrix correlation(const DataMatrix& x);

/// (1 - tau) S + tau (tr S / n) I.
SymMatrix regularize_covariance(const SymMatrix& s, double tau);

/// Orthonormal basis of the column space of `x`. Columns whose norm after projection
/// onto the running basis falls below 1e-8 times the largest input column norm are dropped.
Matrix qr_orthonormal_basis(const Matrix& x);

EigenResult sym_eigen(const SymMatrix& s);

/// Solves A b = nu B b by whitening with B^{-1/2}; vectors satisfy b' B b = 1.
EigenResult generalized_eigen(const SymMatrix& a, const SymMatrix& b);

/// Same, with B supplied through its eigendecomposition.
EigenResult generalized_eigen(const SymMatrix& a, const EigenResult& b_eigen);

/// Eigendecomposition of regularize_covariance(S, tau) from that of S: the eigenvectors
/// are shared and each eigenvalue maps to (1 - tau) l + tau mean(l).
EigenResult regularize_spectrum(const EigenResult& s_eigen, double tau);

/// Upper-tail probability P(chi2_df > x).
double chi_square_sf(double x, int df);

inline constexpr double kRankTolerance = 1e-8;

/// Incremental modified Gram-Schmidt basis with two projection passes.
///
/// Besides the orthonormal columns Q it tracks coefficients W with Q = X W, where X is
/// whatever matrix the caller's `coef` vectors are expressed against. The orthogonalizer
/// uses this to replay observation-space projections on new rows.
class OrthonormalBasis {
public:
    OrthonormalBasis(Eigen::Index length, Eigen::Index coef_dim);

    [[nodiscard]] Eigen::Index rank() const noexcept { return rank_; }
    [[nodiscard]] auto q() const { return q_.leftCols(rank_); }
    [[nodiscard]] auto w() const { return w_.leftCols(rank_); }

    /// Removes the component of `v` in the current span; `coef` is updated alongside.
    void project_out(Vector& v, Vector& coef) const;

    /// Projects `v` and appends it when its residual norm is at least `threshold`.
    bool try_append(Vector v, Vector coef, double threshold);

private:
    Matrix q_;
    Matrix w_;
    Eigen::Index rank_ = 0;
};

}  // namespace crsir
