#pragma once

#include "crsir/numerics.hpp"

#include <cstddef>
#include <vector>

namespace crsir {

/// Partition of variable indices into c blocks.
///
/// Cluster ids are numbered by smallest member index (id 0 holds variable 0). `order` lists
/// the ids by decreasing size, ties by smallest member index; blocks are orthogonalized in
/// that order.
struct ClusterAssignment {
    std::vector<int> labels;
    std::vector<int> order;

    [[nodiscard]] int cluster_count() const noexcept { return static_cast<int>(order.size()); }
    /// Ascending member indices of cluster `id`.
    [[nodiscard]] std::vector<int> members(int id) const;
    [[nodiscard]] std::vector<std::size_t> sizes() const;
};

/// One agglomeration step. Node ids below N are variables; node N + s is created at step s.
struct Merge {
    int step = 0;
    int left = 0;
    int right = 0;
    double height = 0.0;
};

/// Full complete-linkage agglomeration down to a single cluster.
struct Dendrogram {
    int leaf_count = 0;
    std::vector<Merge> merges;

    /// Partition left after applying the first N - c merges.
    [[nodiscard]] ClusterAssignment cut(int c) const;
};

/// D[i][j] = 1 - |R[i][j]| with a zero diagonal.
SymMatrix dissimilarity_matrix(const SymMatrix& correlation);

/// Complete linkage: the distance between clusters is the largest pairwise dissimilarity.
/// Equal minimum linkages go to the lexicographically smallest pair of lowest member indices.
Dendrogram complete_linkage_dendrogram(const SymMatrix& dissimilarity);

ClusterAssignment complete_linkage_cluster(const SymMatrix& dissimilarity, int c);

}  // namespace crsir
