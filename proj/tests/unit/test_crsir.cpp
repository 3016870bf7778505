#include "doctest.h"

#include "crsir/crsir.hpp"
#include "crsir/errors.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <numeric>

using namespace crsir;

namespace {

struct Blocked {
    Matrix x;
    std::vector<double> y;
};

// Three correlated blocks of sizes 5, 3, 2; y driven by an index on all three.
Blocked blocked_design(Rng& rng, Eigen::Index t, double noise) {
    const std::vector<int> block_of{0, 0, 1, 0, 2, 1, 0, 0, 1, 2};
    const Matrix f = oracle::random_matrix(rng, t, 3);
    Blocked d;
    d.x.resize(t, 10);
    for (Eigen::Index j = 0; j < 10; ++j) {
        for (Eigen::Index i = 0; i < t; ++i) d.x(i, j) = f(i, block_of[static_cast<std::size_t>(j)]) + 0.5 * rng.normal();
    }
    d.y.resize(static_cast<std::size_t>(t));
    for (Eigen::Index i = 0; i < t; ++i) {
        const double u = d.x(i, 0) - 0.5 * d.x(i, 2) + 0.3 * d.x(i, 9);
        d.y[static_cast<std::size_t>(i)] = u + 0.2 * u * u * u + noise * rng.normal();
    }
    return d;
}

double max_cross_block_correlation(const OrthogonalizedBlocks& ob) {
    double worst = 0.0;
    for (std::size_t a = 0; a < ob.blocks.size(); ++a) {
        for (std::size_t b = a + 1; b < ob.blocks.size(); ++b) {
            for (Eigen::Index i = 0; i < ob.blocks[a].cols(); ++i) {
                for (Eigen::Index j = 0; j < ob.blocks[b].cols(); ++j) {
                    const Vector u = ob.blocks[a].col(i);
                    const Vector v = ob.blocks[b].col(j);
                    if (u.norm() == 0.0 || v.norm() == 0.0) continue;
                    worst = std::max(worst, oracle::abs_correlation(u, v));
                }
            }
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("orthogonalize_blocks: orthogonal blocks pass through") {
    Rng rng(1);
    // Columns 0-1 and 2-3 span orthogonal, centered subspaces.
    Matrix q = Eigen::HouseholderQR<Matrix>(oracle::random_matrix(rng, 50, 5)).householderQ() * Matrix::Identity(50, 5);
    Matrix x(50, 4);
    for (Eigen::Index j = 0; j < 4; ++j) x.col(j) = q.col(j + 1) - q.col(j + 1).mean() * Vector::Ones(50);
    const ClusterAssignment a{{0, 0, 1, 1}, {0, 1}};
    const OrthogonalizedBlocks ob = orthogonalize_blocks(DataMatrix(x), a);
    REQUIRE(ob.blocks.size() == 2);
    CHECK((ob.blocks[0] - x.leftCols(2)).cwiseAbs().maxCoeff() == 0.0);
    const double tilt = std::abs((x.leftCols(2).transpose() * x.rightCols(2)).maxCoeff());
    CHECK((ob.blocks[1] - x.rightCols(2)).cwiseAbs().maxCoeff() <= 1e-10 + 10.0 * tilt);
    CHECK(ob.projector(0).cols() == 0);
    CHECK(ob.projector(1).cols() == 2);
}

TEST_CASE("orthogonalize_blocks: duplicated block is zeroed and flagged") {
    Rng rng(2);
    Matrix x(60, 4);
    x.leftCols(2) = oracle::random_matrix(rng, 60, 2);
    x.rightCols(2) = x.leftCols(2);
    const ClusterAssignment a{{0, 0, 1, 1}, {0, 1}};
    const OrthogonalizedBlocks ob = orthogonalize_blocks(DataMatrix(x), a);
    CHECK(ob.degenerate[1] == std::vector<bool>{true, true});
    CHECK(ob.blocks[1].cwiseAbs().maxCoeff() == 0.0);
    CHECK(ob.degenerate[0] == std::vector<bool>{false, false});
}

TEST_CASE("orthogonalize_blocks: random three-block instances and replay") {
    Rng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
        const Matrix x = standardize(DataMatrix(oracle::random_matrix(rng, 200, 30) +
                                                oracle::random_matrix(rng, 200, 1) * Vector::Ones(30).transpose()))
                             .data.values;
        std::vector<int> labels(30);
        for (std::size_t j = 0; j < 30; ++j) labels[j] = static_cast<int>((j * 7) % 3);
        const ClusterAssignment a{labels, {0, 1, 2}};
        const OrthogonalizedBlocks ob = orthogonalize_blocks(DataMatrix(x), a);
        CHECK(max_cross_block_correlation(ob) <= 1e-10);
        const Matrix replayed = x * ob.replay;
        for (std::size_t b = 0; b < ob.blocks.size(); ++b) {
            for (std::size_t j = 0; j < ob.members[b].size(); ++j) {
                const Vector diff = replayed.col(ob.members[b][j]) - ob.blocks[b].col(static_cast<Eigen::Index>(j));
                CHECK(diff.cwiseAbs().maxCoeff() <= 1e-10);
            }
        }
    }
}

TEST_CASE("crsir_fit: one cluster without shrinkage is plain SIR") {
    Rng rng(4);
    for (int rep = 0; rep < 5; ++rep) {
        const Blocked d = blocked_design(rng, 300, 0.5);
        const CrsirModel model = crsir_fit(DataMatrix(d.x), d.y, {1, 0.0, 10, 0.05});
        const Matrix xs = standardize(DataMatrix(d.x)).data.values;
        const EdrBasis sir = sir_fit(xs, d.y, {10, 0.0, 0.05});
        const Matrix z = model.transform(d.x);
        const Matrix ref = xs * sir.directions;
        REQUIRE(ref.cols() >= 1);
        CHECK(oracle::abs_correlation(z.col(0), ref.col(0)) >= 0.9999);
    }
}

TEST_CASE("crsir_fit: singleton clusters without shrinkage match SIR on the standardized data") {
    Rng rng(5);
    const Blocked d = blocked_design(rng, 300, 0.5);
    const CrsirModel model = crsir_fit(DataMatrix(d.x), d.y, {10, 0.0, 10, 0.05});
    CHECK(model.block_dims == std::vector<int>(10, 1));
    const Matrix xs = standardize(DataMatrix(d.x)).data.values;
    const EdrBasis sir = sir_fit(xs, d.y, {10, 0.0, 0.05});
    CHECK(oracle::abs_correlation(model.transform(d.x).col(0), xs * sir.directions.col(0)) >= 0.9999);
}

TEST_CASE("crsir model structure: Lambda sparsity, block-wise variates, linearity") {
    Rng rng(6);
    const Blocked d = blocked_design(rng, 250, 0.5);
    const CrsirModel model = crsir_fit(DataMatrix(d.x), d.y, {3, 0.3, 8, 0.05});
    const Eigen::Index m = std::accumulate(model.block_dims.begin(), model.block_dims.end(), Eigen::Index{0});
    CHECK(model.lambda.rows() == 10);
    CHECK(model.lambda.cols() == m);
    CHECK(model.gamma.rows() == m);
    CHECK(model.gamma.cols() >= 1);
    CHECK(model.gamma.cols() <= m);
    CHECK(model.head.size() == model.gamma.cols() + 1);

    // Column l of Lambda lives on one cluster.
    Eigen::Index col = 0;
    for (std::size_t b = 0; b < model.block_dims.size(); ++b) {
        const int id = model.assignment.order[b];
        for (int k = 0; k < model.block_dims[b]; ++k, ++col) {
            for (Eigen::Index v = 0; v < 10; ++v) {
                if (model.assignment.labels[static_cast<std::size_t>(v)] != id) CHECK(model.lambda(v, col) == 0.0);
            }
        }
    }

    // Training variates rebuilt block by block from the orthogonalized data.
    const Standardized st = standardize(DataMatrix(d.x));
    const OrthogonalizedBlocks ob = orthogonalize_blocks(st.data, model.assignment);
    Matrix pooled(d.x.rows(), m);
    col = 0;
    for (std::size_t b = 0; b < ob.blocks.size(); ++b) {
        for (int k = 0; k < model.block_dims[b]; ++k, ++col) {
            Vector v = Vector::Zero(d.x.rows());
            for (std::size_t j = 0; j < ob.members[b].size(); ++j) {
                v += model.lambda(ob.members[b][j], col) * ob.blocks[b].col(static_cast<Eigen::Index>(j));
            }
            pooled.col(col) = v;
        }
    }
    CHECK((pooled * model.gamma - model.transform(d.x)).cwiseAbs().maxCoeff() <= 1e-10);

    // The column means map to zero variates and the intercept.
    const Matrix centre = model.standardization.mean.transpose();
    CHECK(model.transform(centre).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(model.predict(centre)(0) == doctest::Approx(model.head(0)).epsilon(1e-12));

    // Predictions are intercept + slopes' variates.
    const Matrix z = model.transform(d.x.topRows(5));
    const Vector p = model.predict(d.x.topRows(5));
    for (Eigen::Index i = 0; i < 5; ++i) {
        CHECK(p(i) == doctest::Approx(model.head(0) + z.row(i).dot(model.head.tail(model.head.size() - 1))));
    }
}

TEST_CASE("crsir_predict: noiseless linear index is fitted nearly exactly") {
    // Slice means carry sampling error even without noise, so the fit is close, not exact.
    Rng rng(7);
    Vector beta(5);
    beta << 1.0, -2.0, 0.5, 0.0, 3.0;
    double previous = 1.0;
    for (Eigen::Index t : {200, 2000}) {
        const Matrix x = oracle::random_matrix(rng, t, 5);
        const Vector yv = (x * beta).array() + 4.0;
        const std::vector<double> y(yv.data(), yv.data() + yv.size());
        const CrsirModel model = crsir_fit(DataMatrix(x), y, {1, 0.0, 10, 0.05});
        const Vector resid = model.predict(x) - yv;
        const double relative = resid.norm() / (yv.array() - yv.mean()).matrix().norm();
        CHECK(relative < 0.1);
        CHECK(relative < previous);
        previous = relative;
    }
}

TEST_CASE("crsir_predict: null response gives roughly the response spread") {
    Rng rng(8);
    const Matrix x = oracle::random_matrix(rng, 2000, 6);
    std::vector<double> y(2000);
    for (double& v : y) v = 2.0 * rng.normal();
    const CrsirModel model = crsir_fit(DataMatrix(x.topRows(1000)), std::vector<double>(y.begin(), y.begin() + 1000),
                                       {2, 0.5, 10, 0.05});
    const Vector p = model.predict(x.bottomRows(1000));
    double ss = 0.0;
    for (Eigen::Index i = 0; i < 1000; ++i) ss += std::pow(p(i) - y[static_cast<std::size_t>(1000 + i)], 2);
    CHECK(std::sqrt(ss / 1000.0) == doctest::Approx(2.0).epsilon(0.10));
}

TEST_CASE("crsir_predict: invariant to predictor order") {
    Rng rng(9);
    const Blocked d = blocked_design(rng, 300, 0.5);
    const Matrix fresh = blocked_design(rng, 20, 0.5).x;
    const CrsirModel base = crsir_fit(DataMatrix(d.x), d.y, {3, 0.0, 10, 0.05});
    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    for (int rep = 0; rep < 5; ++rep) {
        for (std::size_t k = perm.size() - 1; k > 0; --k) {
            std::swap(perm[k], perm[static_cast<std::size_t>(rng.uniform() * static_cast<double>(k + 1))]);
        }
        Matrix xp(d.x.rows(), 10);
        Matrix fp(fresh.rows(), 10);
        for (Eigen::Index j = 0; j < 10; ++j) {
            xp.col(j) = d.x.col(perm[static_cast<std::size_t>(j)]);
            fp.col(j) = fresh.col(perm[static_cast<std::size_t>(j)]);
        }
        const CrsirModel model = crsir_fit(DataMatrix(xp), d.y, {3, 0.0, 10, 0.05});
        CHECK((model.predict(fp) - base.predict(fresh)).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("crsir_fit: refits are bit-identical") {
    Rng rng(10);
    const Blocked d = blocked_design(rng, 200, 0.5);
    const CrsirModel a = crsir_fit(DataMatrix(d.x), d.y, {4, 0.5, 0, 0.05});
    const CrsirModel b = crsir_fit(DataMatrix(d.x), d.y, {4, 0.5, 0, 0.05});
    CHECK(a.lambda == b.lambda);
    CHECK(a.gamma == b.gamma);
    CHECK(a.head == b.head);
    CHECK(a.orthogonalizer == b.orthogonalizer);
    CHECK(a.slices == 10);
}

TEST_CASE("crsir_fit and transform: error paths") {
    Rng rng(11);
    const Blocked d = blocked_design(rng, 100, 0.5);
    CHECK_THROWS_AS(crsir_fit(DataMatrix(d.x), d.y, {0, 0.0, 10, 0.05}), DomainError);
    CHECK_THROWS_AS(crsir_fit(DataMatrix(d.x), d.y, {11, 0.0, 10, 0.05}), DomainError);
    CHECK_THROWS_AS(crsir_fit(DataMatrix(d.x), d.y, {2, 1.5, 10, 0.05}), DomainError);
    CHECK_THROWS_AS(crsir_fit(DataMatrix(d.x), d.y, {2, 0.5, 50, 0.05}), TooFewObservations);
    CHECK_THROWS_AS(crsir_fit(DataMatrix(d.x), std::vector<double>(99, 1.0), {2, 0.5, 10, 0.05}), LengthMismatch);
    const CrsirModel model = crsir_fit(DataMatrix(d.x), d.y, {2, 0.5, 10, 0.05});
    CHECK_THROWS_AS(model.transform(Matrix::Zero(1, 9)), DimensionMismatch);
    CHECK_THROWS_AS(crsir_predict(model, Matrix::Zero(1, 11)), DimensionMismatch);
}
