#include "crsir/crsir.hpp"

#include "crsir/errors.hpp"

#include <algorithm>
#include <cmath>

namespace crsir {

OrthogonalizedBlocks orthogonalize_blocks(const DataMatrix& standardized, const ClusterAssignment& assignment) {
    const Matrix& xs = standardized.values;
    const Eigen::Index t = xs.rows();
    const Eigen::Index n = xs.cols();
    if (static_cast<Eigen::Index>(assignment.labels.size()) != n) {
        throw DimensionMismatch("cluster labels do not cover every column");
    }

    OrthogonalizedBlocks out;
    out.replay = Matrix::Zero(n, n);
    OrthonormalBasis basis(t, n);

    for (int id : assignment.order) {
        const std::vector<int> members = assignment.members(id);
        const auto ni = static_cast<Eigen::Index>(members.size());
        Matrix block(t, ni);
        std::vector<bool> flags(members.size(), false);
        Matrix coefs(n, ni);

        out.basis_rank_before.push_back(basis.rank());
        for (Eigen::Index j = 0; j < ni; ++j) {
            const int var = members[static_cast<std::size_t>(j)];
            Vector v = xs.col(var);
            Vector coef = Vector::Unit(n, var);
            const double before = v.norm();
            basis.project_out(v, coef);
            if (!(v.norm() >= kRankTolerance * before)) {
                v.setZero();
                coef.setZero();
                flags[static_cast<std::size_t>(j)] = true;
            }
            block.col(j) = v;
            coefs.col(j) = coef;
            out.replay.col(var) = coef;
        }

        // Extend the running basis with an orthonormal basis of this block's transformed span.
        const double leading = ni > 0 ? block.colwise().norm().maxCoeff() : 0.0;
        if (leading > 0.0) {
            for (Eigen::Index j = 0; j < ni; ++j) {
                if (flags[static_cast<std::size_t>(j)]) continue;
                basis.try_append(block.col(j), coefs.col(j), kRankTolerance * leading);
            }
        }

        out.members.push_back(members);
        out.blocks.push_back(std::move(block));
        out.degenerate.push_back(std::move(flags));
    }
    out.basis = basis.q();
    return out;
}

Matrix CrsirModel::transform(const Matrix& x) const {
    if (x.cols() != input_dim()) {
        throw DimensionMismatch("model expects " + std::to_string(input_dim()) + " columns, got " +
                                std::to_string(x.cols()));
    }
    return standardization.apply(x) * orthogonalizer * lambda * gamma;
}

Vector CrsirModel::predict(const Matrix& x) const {
    const Matrix z = transform(x);
    Vector out = z * head.tail(head.size() - 1);
    out.array() += head(0);
    return out;
}

CrsirPreparation crsir_prepare(const DataMatrix& x) {
    Standardized st = standardize(x);
    // Standardized columns have unit variance, so their covariance is the correlation matrix.
    const SymMatrix corr = correlation(st.data);
    Dendrogram tree = complete_linkage_dendrogram(dissimilarity_matrix(corr));
    return {std::move(st), std::move(tree)};
}

namespace {

/// Least-squares head on [1, F], dropping trailing variates until the design has full rank.
Vector fit_head(const Matrix& variates, std::span<const double> y, Eigen::Index& kept) {
    const Eigen::Index t = variates.rows();
    const Eigen::Map<const Vector> target(y.data(), static_cast<Eigen::Index>(y.size()));
    for (kept = variates.cols(); kept >= 0; --kept) {
        if (t < kept + 1) continue;
        Matrix design(t, kept + 1);
        design.col(0).setOnes();
        design.rightCols(kept) = variates.leftCols(kept);
        Eigen::ColPivHouseholderQR<Matrix> qr(design);
        qr.setThreshold(1e-10);
        if (qr.rank() == kept + 1) return qr.solve(target);
    }
    throw SingularHead("head regression is rank deficient even with the intercept alone");
}

}  // namespace

BlockDesign crsir_block_design(const CrsirPreparation& prep, int clusters, std::span<const double> y, int slices) {
    const Matrix& xs = prep.standardized.data.values;
    const Eigen::Index t = xs.rows();
    if (static_cast<std::size_t>(t) != y.size()) throw LengthMismatch("predictor rows and response length differ");
    if (clusters < 1 || clusters > xs.cols()) {
        throw DomainError("cluster count " + std::to_string(clusters) + " outside [1, " + std::to_string(xs.cols()) +
                          "]");
    }
    const int h = slices > 0 ? slices : default_slice_count(t);
    if (t <= 2 * static_cast<Eigen::Index>(h)) {
        throw TooFewObservations("CRSIR with " + std::to_string(h) + " slices needs more than " +
                                 std::to_string(2 * h) + " observations");
    }

    BlockDesign out;
    out.assignment = prep.dendrogram.cut(clusters);
    out.blocks = orthogonalize_blocks(prep.standardized.data, out.assignment);
    out.slice_count = h;
    out.slices = make_slices(y, h);
    const OrthogonalizedBlocks& ob = out.blocks;
    for (std::size_t b = 0; b < ob.blocks.size(); ++b) {
        std::vector<int> vars;
        std::vector<Eigen::Index> cols;
        for (std::size_t j = 0; j < ob.members[b].size(); ++j) {
            if (ob.degenerate[b][j]) continue;
            vars.push_back(ob.members[b][j]);
            cols.push_back(static_cast<Eigen::Index>(j));
        }
        Matrix sub(t, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = ob.blocks[b].col(cols[j]);
        out.moments.push_back(cols.size() > 1 ? sir_moments(sub, out.slices) : SirMoments{});
        out.active_vars.push_back(std::move(vars));
        out.active.push_back(std::move(sub));
    }
    return out;
}

CrsirModel crsir_fit_design(const CrsirPreparation& prep, const BlockDesign& design, std::span<const double> y,
                            double tau, double alpha) {
    const Matrix& xs = prep.standardized.data.values;
    const Eigen::Index t = xs.rows();
    const Eigen::Index n = xs.cols();
    if (static_cast<std::size_t>(t) != y.size()) throw LengthMismatch("predictor rows and response length differ");
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("shrinkage tau must lie in [0, 1]");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("test level alpha must lie in (0, 1)");

    // Per-block directions, embedded at the block's original variable positions.
    const std::size_t blocks = design.active.size();
    std::vector<Matrix> thetas(blocks);
    std::vector<int> block_dims;
    Eigen::Index m = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const Eigen::Index width = design.active[b].cols();
        if (width == 1) {
            thetas[b] = Matrix::Ones(1, 1);
        } else if (width > 1) {
            thetas[b] = sir_fit(design.moments[b], tau, alpha).directions;
        } else {
            thetas[b] = Matrix(0, 0);
        }
        block_dims.push_back(static_cast<int>(thetas[b].cols()));
        m += thetas[b].cols();
    }
    if (m == 0) throw RankZero("every block was projected out");
    const std::vector<std::vector<int>>& used = design.active_vars;
    const OrthogonalizedBlocks& ob = design.blocks;
    const int h = design.slice_count;

    Matrix lambda = Matrix::Zero(n, m);
    Eigen::Index col = 0;
    for (std::size_t b = 0; b < thetas.size(); ++b) {
        for (Eigen::Index k = 0; k < thetas[b].cols(); ++k, ++col) {
            for (std::size_t r = 0; r < used[b].size(); ++r) lambda(used[b][r], col) = thetas[b](static_cast<Eigen::Index>(r), k);
        }
    }

    // Pooled variates are assembled block-wise from the transformed data.
    Matrix pooled(t, m);
    col = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        if (thetas[b].cols() == 0) continue;
        pooled.middleCols(col, thetas[b].cols()) = design.active[b] * thetas[b];
        col += thetas[b].cols();
    }

    Matrix gamma = m == 1 ? Matrix::Ones(1, 1) : sir_fit(sir_moments(pooled, design.slices), tau, alpha).directions;

    const Matrix variates = pooled * gamma;
    Eigen::Index kept = 0;
    Vector head = fit_head(variates, y, kept);
    if (kept == 0) throw SingularHead("no CRSIR variate survives the head regression");
    gamma.conservativeResize(Eigen::NoChange, kept);

    CrsirModel model;
    model.column_names = prep.standardized.data.column_names;
    model.standardization = prep.standardized.params;
    model.assignment = design.assignment;
    model.orthogonalizer = ob.replay;
    model.block_dims = std::move(block_dims);
    model.lambda = std::move(lambda);
    model.gamma = std::move(gamma);
    model.head = std::move(head);
    model.tau = tau;
    model.clusters = design.assignment.cluster_count();
    model.slices = h;
    model.alpha = alpha;
    return model;
}

CrsirModel crsir_fit(const DataMatrix& x, std::span<const double> y, const CrsirOptions& options) {
    x.validate();
    if (static_cast<std::size_t>(x.rows()) != y.size()) throw LengthMismatch("predictor rows and response length differ");
    if (options.clusters < 1 || options.clusters > x.cols()) {
        throw DomainError("cluster count " + std::to_string(options.clusters) + " outside [1, " +
                          std::to_string(x.cols()) + "]");
    }
    const CrsirPreparation prep = crsir_prepare(x);
    const BlockDesign design = crsir_block_design(prep, options.clusters, y, options.slices);
    return crsir_fit_design(prep, design, y, options.tau, options.alpha);
}

}  // namespace crsir
