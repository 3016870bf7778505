#include "crsir/numerics.hpp"

#include "crsir/errors.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace crsir {

namespace {

void check_finite(const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (!std::isfinite(m(i, j))) {
                throw DomainError("non-finite entry at row " + std::to_string(i) + ", column " +
                                  std::to_string(j));
            }
        }
    }
}

// Largest-magnitude component positive; first index wins ties.
void fix_sign(Eigen::Ref<Vector> v) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > best) {
            best = std::abs(v(i));
            arg = i;
        }
    }
    if (v.size() > 0 && v(arg) < 0.0) v = -v;
}

}  // namespace

DataMatrix::DataMatrix(Matrix v) : values(std::move(v)) {
    column_names.reserve(static_cast<std::size_t>(values.cols()));
    for (Eigen::Index j = 0; j < values.cols(); ++j) column_names.push_back("x" + std::to_string(j));
}

DataMatrix::DataMatrix(Matrix v, std::vector<std::string> names)
    : values(std::move(v)), column_names(std::move(names)) {}

void DataMatrix::validate() const {
    if (values.rows() < 2) throw TooFewObservations("data matrix needs at least 2 rows");
    if (values.cols() < 1) throw DomainError("data matrix needs at least 1 column");
    if (static_cast<Eigen::Index>(column_names.size()) != values.cols()) {
        throw DimensionMismatch("column name count does not match column count");
    }
    check_finite(values);
}

SymMatrix::SymMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) throw DimensionMismatch("symmetric matrix must be square");
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < values_.rows(); ++i) {
            const double a = values_(i, j);
            const double b = values_(j, i);
            if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
                throw DomainError("matrix is not symmetric at (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ")");
            }
        }
    }
}

SymMatrix SymMatrix::trusted(Matrix values) {
    SymMatrix s;
    s.values_ = std::move(values);
    return s;
}

Matrix StandardizationParams::apply(const Matrix& x) const {
    if (x.cols() != mean.size()) {
        throw DimensionMismatch("expected " + std::to_string(mean.size()) + " columns, got " +
                                std::to_string(x.cols()));
    }
    return (x.rowwise() - mean.transpose()).array().rowwise() / sd.transpose().array();
}

Standardized standardize(const DataMatrix& x) {
    x.validate();
    const auto t = static_cast<double>(x.rows());
    StandardizationParams params;
    params.mean = x.values.colwise().mean().transpose();
    Matrix centered = x.values.rowwise() - params.mean.transpose();
    params.sd = (centered.colwise().squaredNorm().array() / (t - 1.0)).sqrt().transpose();
    for (Eigen::Index j = 0; j < params.sd.size(); ++j) {
        // A column that is constant up to rounding has sd at the rounding scale of its mean.
        const double floor = 1e-14 * std::max(1.0, std::abs(params.mean(j)));
        if (!(params.sd(j) > floor)) throw ConstantColumn(static_cast<std::size_t>(j));
    }
    centered.array().rowwise() /= params.sd.transpose().array();
    return {DataMatrix(std::move(centered), x.column_names), std::move(params)};
}

SymMatrix covariance(const Matrix& x) {
    if (x.rows() < 2) throw TooFewObservations("covariance needs at least 2 rows");
    const Matrix centered = x.rowwise() - x.colwise().mean();
    Matrix s = (centered.transpose() * centered) / static_cast<double>(x.rows() - 1);
    // Mirror the lower triangle so the result is exactly symmetric.
    s.triangularView<Eigen::StrictlyUpper>() = s.transpose().triangularView<Eigen::StrictlyUpper>();
    return SymMatrix::trusted(std::move(s));
}

SymMatrix covariance(const DataMatrix& x) {
    x.validate();
    return covariance(x.values);
}

SymMatrix correlation(const DataMatrix& x) {
    Matrix s = covariance(x).values();
    Vector sd = s.diagonal().cwiseSqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
        const double floor = 1e-14 * std::max(1.0, std::abs(x.values.col(j).mean()));
        if (!(sd(j) > floor)) throw ConstantColumn(static_cast<std::size_t>(j));
    }
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            s(i, j) = i == j ? 1.0 : std::clamp(s(i, j) / (sd(i) * sd(j)), -1.0, 1.0);
        }
    }
    return SymMatrix::trusted(std::move(s));
}

SymMatrix regularize_covariance(const SymMatrix& s, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("shrinkage tau must lie in [0, 1]");
    const Eigen::Index n = s.size();
    if (n < 1) throw DomainError("cannot regularize an empty matrix");
    const double level = s.values().trace() / static_cast<double>(n);
    if (tau == 1.0) {
        Matrix d = Matrix::Zero(n, n);
        d.diagonal().setConstant(level);
        return SymMatrix::trusted(std::move(d));
    }
    Matrix out = (1.0 - tau) * s.values();
    out.diagonal().array() += tau * level;
    return SymMatrix::trusted(std::move(out));
}

OrthonormalBasis::OrthonormalBasis(Eigen::Index length, Eigen::Index coef_dim)
    : q_(length, std::min(length, std::max<Eigen::Index>(coef_dim, 1))),
      w_(coef_dim, std::min(length, std::max<Eigen::Index>(coef_dim, 1))) {}

void OrthonormalBasis::project_out(Vector& v, Vector& coef) const {
    for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index k = 0; k < rank_; ++k) {
            const double r = q_.col(k).dot(v);
            v.noalias() -= r * q_.col(k);
            coef.noalias() -= r * w_.col(k);
        }
    }
}

bool OrthonormalBasis::try_append(Vector v, Vector coef, double threshold) {
    project_out(v, coef);
    const double norm = v.norm();
    if (!(norm >= threshold) || norm == 0.0 || rank_ >= q_.rows()) return false;
    if (rank_ == q_.cols()) {
        q_.conservativeResize(Eigen::NoChange, std::min(q_.rows(), 2 * q_.cols()));
        w_.conservativeResize(Eigen::NoChange, q_.cols());
    }
    q_.col(rank_) = v / norm;
    w_.col(rank_) = coef / norm;
    ++rank_;
    return true;
}

Matrix qr_orthonormal_basis(const Matrix& x) {
    check_finite(x);
    const double leading = x.cols() > 0 ? x.colwise().norm().maxCoeff() : 0.0;
    if (!(leading > 0.0)) throw RankZero("all columns are zero");
    OrthonormalBasis basis(x.rows(), x.cols());
    const double threshold = kRankTolerance * leading;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        basis.try_append(x.col(j), Vector::Unit(x.cols(), j), threshold);
    }
    if (basis.rank() == 0) throw RankZero("no column above rank tolerance");
    return basis.q();
}

EigenResult sym_eigen(const SymMatrix& s) {
    const Eigen::Index n = s.size();
    if (n == 0) return {Vector(0), Matrix(0, 0)};
    check_finite(s.values());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s.values());
    if (solver.info() != Eigen::Success) throw ConvergenceFailure("symmetric eigensolver did not converge");
    // Eigen sorts ascending; reverse into non-increasing order.
    EigenResult out{solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
    for (Eigen::Index k = 0; k < n; ++k) fix_sign(out.eigenvectors.col(k));
    return out;
}

EigenResult generalized_eigen(const SymMatrix& a, const EigenResult& b_eigen) {
    const Eigen::Index n = b_eigen.eigenvalues.size();
    if (a.size() != n) throw DimensionMismatch("generalized eigenproblem needs equal sizes");
    if (n == 0) return b_eigen;
    const double largest = b_eigen.eigenvalues(0);
    const double smallest = b_eigen.eigenvalues(n - 1);
    if (!(largest > 0.0) || !(smallest > 1e-12 * largest)) {
        throw NotPositiveDefinite("right-hand matrix is not positive definite (smallest eigenvalue " +
                                  std::to_string(smallest) + ")");
    }
    const Vector inv_sqrt = b_eigen.eigenvalues.cwiseSqrt().cwiseInverse();
    const Matrix whiten = b_eigen.eigenvectors * inv_sqrt.asDiagonal() * b_eigen.eigenvectors.transpose();
    Matrix c = whiten * a.values() * whiten;
    c = 0.5 * (c + c.transpose()).eval();
    EigenResult ce = sym_eigen(SymMatrix::trusted(std::move(c)));
    ce.eigenvectors = whiten * ce.eigenvectors;
    for (Eigen::Index k = 0; k < n; ++k) fix_sign(ce.eigenvectors.col(k));
    return ce;
}

EigenResult generalized_eigen(const SymMatrix& a, const SymMatrix& b) {
    if (a.size() != b.size()) throw DimensionMismatch("generalized eigenproblem needs equal sizes");
    return generalized_eigen(a, sym_eigen(b));
}

EigenResult regularize_spectrum(const EigenResult& s_eigen, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("shrinkage tau must lie in [0, 1]");
    EigenResult out = s_eigen;
    if (tau == 0.0 || out.eigenvalues.size() == 0) return out;
    const double level = out.eigenvalues.mean();
    out.eigenvalues = (1.0 - tau) * out.eigenvalues.array() + tau * level;
    return out;
}

double chi_square_sf(double x, int df) {
    if (df < 1) throw DomainError("chi-square degrees of freedom must be positive");
    if (!(x >= 0.0)) throw DomainError("chi-square statistic must be non-negative");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

}  // namespace crsir
