#include "doctest.h"

#include "crsir/clustering.hpp"
#include "crsir/errors.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <numeric>
#include <set>

using namespace crsir;

namespace {

std::set<std::set<int>> as_sets(const ClusterAssignment& a) {
    std::set<std::set<int>> out;
    for (int id = 0; id < a.cluster_count(); ++id) {
        const std::vector<int> m = a.members(id);
        out.insert({m.begin(), m.end()});
    }
    return out;
}

SymMatrix correlation_from_abs(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix r(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double v : row) r(i, j++) = v;
        ++i;
    }
    return SymMatrix(r);
}

Matrix correlated_blocks(Rng& rng, Eigen::Index t, const std::vector<int>& block_of) {
    const int blocks = *std::max_element(block_of.begin(), block_of.end()) + 1;
    const Matrix f = oracle::random_matrix(rng, t, blocks);
    Matrix x(t, static_cast<Eigen::Index>(block_of.size()));
    for (std::size_t j = 0; j < block_of.size(); ++j) {
        for (Eigen::Index i = 0; i < t; ++i) x(i, static_cast<Eigen::Index>(j)) = f(i, block_of[j]) + 0.4 * rng.normal();
    }
    return x;
}

}  // namespace

TEST_CASE("dissimilarity: direct formula and errors") {
    const SymMatrix r = correlation_from_abs({{1.0, -1.0, 0.9}, {-1.0, 1.0, 0.0}, {0.9, 0.0, 1.0}});
    const SymMatrix d = dissimilarity_matrix(r);
    CHECK(d(0, 0) == 0.0);
    CHECK(d(0, 1) == 0.0);
    CHECK(d(0, 2) == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(d(1, 2) == 1.0);

    const SymMatrix bad = correlation_from_abs({{1.0, 1.1}, {1.1, 1.0}});
    CHECK_THROWS_AS(dissimilarity_matrix(bad), DomainError);
}

TEST_CASE("complete linkage: trivial cuts and the four-variable example") {
    const SymMatrix r = correlation_from_abs({{1.0, 0.95, 0.05, 0.02},
                                              {0.95, 1.0, 0.01, 0.03},
                                              {0.05, 0.01, 1.0, 0.90},
                                              {0.02, 0.03, 0.90, 1.0}});
    const SymMatrix d = dissimilarity_matrix(r);

    const ClusterAssignment two = complete_linkage_cluster(d, 2);
    CHECK(as_sets(two) == std::set<std::set<int>>{{0, 1}, {2, 3}});
    CHECK(as_sets(two) == oracle::brute_complete_linkage(d.values(), 2).partition);

    const ClusterAssignment all = complete_linkage_cluster(d, 4);
    CHECK(all.cluster_count() == 4);
    for (int j = 0; j < 4; ++j) CHECK(all.labels[static_cast<std::size_t>(j)] == j);

    const ClusterAssignment one = complete_linkage_cluster(d, 1);
    CHECK(one.members(0) == std::vector<int>{0, 1, 2, 3});

    CHECK_THROWS_AS(complete_linkage_cluster(d, 0), DomainError);
    CHECK_THROWS_AS(complete_linkage_cluster(d, 5), DomainError);
}

TEST_CASE("complete linkage: ties go to the lexicographically smallest pair") {
    // Every off-diagonal dissimilarity equal: merges must proceed (0,1), then {0,1} with 2, ...
    Matrix d = Matrix::Constant(4, 4, 0.5);
    d.diagonal().setZero();
    const Dendrogram tree = complete_linkage_dendrogram(SymMatrix(d));
    REQUIRE(tree.merges.size() == 3);
    CHECK(tree.merges[0].left == 0);
    CHECK(tree.merges[0].right == 1);
    CHECK(tree.merges[1].left == 4);
    CHECK(tree.merges[1].right == 2);
    CHECK(as_sets(tree.cut(3)) == std::set<std::set<int>>{{0, 1}, {2}, {3}});
    CHECK(as_sets(tree.cut(2)) == oracle::brute_complete_linkage(d, 2).partition);
}

TEST_CASE("complete linkage agrees with brute-force enumeration on random instances") {
    Rng rng(11);
    for (int rep = 0; rep < 30; ++rep) {
        const Eigen::Index n = 4 + rep % 9;
        const Matrix x = oracle::random_matrix(rng, 40, n);
        const SymMatrix d = dissimilarity_matrix(correlation(DataMatrix(x)));
        const Dendrogram tree = complete_linkage_dendrogram(d);
        for (int c = 1; c <= n; ++c) {
            const oracle::BruteLinkage ref = oracle::brute_complete_linkage(d.values(), c);
            CHECK(as_sets(tree.cut(c)) == ref.partition);
        }
        const oracle::BruteLinkage full = oracle::brute_complete_linkage(d.values(), 1);
        for (std::size_t s = 0; s < tree.merges.size(); ++s) {
            CHECK(std::abs(tree.merges[s].height - full.heights[s]) <= 1e-14);
        }
    }
}

TEST_CASE("assignment invariants: ids, sizes and processing order") {
    Rng rng(5);
    const Matrix x = correlated_blocks(rng, 200, {2, 0, 1, 0, 2, 2, 1, 0, 2});
    const SymMatrix d = dissimilarity_matrix(correlation(DataMatrix(x)));
    for (int c = 1; c <= 9; ++c) {
        const ClusterAssignment a = complete_linkage_cluster(d, c);
        const std::vector<std::size_t> sizes = a.sizes();
        CHECK(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == 9);
        for (std::size_t s : sizes) CHECK(s > 0);
        std::vector<int> sorted = a.order;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> ids(static_cast<std::size_t>(c));
        std::iota(ids.begin(), ids.end(), 0);
        CHECK(sorted == ids);
        // Ids numbered by smallest member.
        for (int id = 1; id < c; ++id) CHECK(a.members(id - 1).front() < a.members(id).front());
        // Order: decreasing size, then smallest member.
        for (std::size_t k = 1; k < a.order.size(); ++k) {
            const auto prev = sizes[static_cast<std::size_t>(a.order[k - 1])];
            const auto cur = sizes[static_cast<std::size_t>(a.order[k])];
            CHECK(prev >= cur);
            if (prev == cur) CHECK(a.order[k - 1] < a.order[k]);
        }
    }
    CHECK(as_sets(complete_linkage_cluster(d, 3)) == std::set<std::set<int>>{{1, 3, 7}, {2, 6}, {0, 4, 5, 8}});
}

TEST_CASE("merge heights never decrease") {
    Rng rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix x = oracle::random_matrix(rng, 30, 12);
        const Dendrogram tree = complete_linkage_dendrogram(dissimilarity_matrix(correlation(DataMatrix(x))));
        for (std::size_t s = 1; s < tree.merges.size(); ++s) CHECK(tree.merges[s].height >= tree.merges[s - 1].height);
    }
}

TEST_CASE("partition is invariant to variable order and scaling") {
    Rng rng(8);
    const std::vector<int> blocks{0, 1, 2, 0, 1, 2, 0, 1, 3, 3};
    const Matrix x = correlated_blocks(rng, 150, blocks);
    const ClusterAssignment base = complete_linkage_cluster(dissimilarity_matrix(correlation(DataMatrix(x))), 4);

    std::vector<int> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    for (int rep = 0; rep < 10; ++rep) {
        for (std::size_t k = perm.size() - 1; k > 0; --k) {
            std::swap(perm[k], perm[static_cast<std::size_t>(rng.uniform() * static_cast<double>(k + 1))]);
        }
        Matrix xp(x.rows(), x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) xp.col(j) = x.col(perm[static_cast<std::size_t>(j)]) * (j % 2 ? -3.0 : 0.5);
        const ClusterAssignment a = complete_linkage_cluster(dissimilarity_matrix(correlation(DataMatrix(xp))), 4);
        std::set<std::set<int>> mapped;
        for (const auto& s : as_sets(a)) {
            std::set<int> m;
            for (int j : s) m.insert(perm[static_cast<std::size_t>(j)]);
            mapped.insert(m);
        }
        CHECK(mapped == as_sets(base));
    }
}
