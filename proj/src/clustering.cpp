#include "crsir/clustering.hpp"

#include "crsir/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace crsir {

std::vector<int> ClusterAssignment::members(int id) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == id) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<std::size_t> ClusterAssignment::sizes() const {
    std::vector<std::size_t> out(order.size(), 0);
    for (int l : labels) ++out[static_cast<std::size_t>(l)];
    return out;
}

SymMatrix dissimilarity_matrix(const SymMatrix& correlation) {
    const Eigen::Index n = correlation.size();
    Matrix d(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double r = correlation(i, j);
            if (!(std::abs(r) <= 1.0 + 1e-12)) {
                throw DomainError("correlation entry outside [-1, 1] at (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ")");
            }
            d(i, j) = i == j ? 0.0 : std::max(0.0, 1.0 - std::abs(r));
        }
    }
    return SymMatrix::trusted(std::move(d));
}

Dendrogram complete_linkage_dendrogram(const SymMatrix& dissimilarity) {
    const auto n = static_cast<int>(dissimilarity.size());
    if (n < 1) throw DomainError("cannot cluster zero variables");

    // Active clusters are tracked by slot; each slot remembers its node id and lowest member.
    Matrix dist = dissimilarity.values();
    std::vector<int> node(static_cast<std::size_t>(n));
    std::vector<int> lowest(static_cast<std::size_t>(n));
    std::vector<bool> active(static_cast<std::size_t>(n), true);
    std::iota(node.begin(), node.end(), 0);
    std::iota(lowest.begin(), lowest.end(), 0);

    Dendrogram out;
    out.leaf_count = n;
    out.merges.reserve(static_cast<std::size_t>(n - 1));
    for (int step = 0; step < n - 1; ++step) {
        int bi = -1;
        int bj = -1;
        double best = std::numeric_limits<double>::infinity();
        // Slots are visited in increasing lowest-member order, so strict '<' keeps the
        // lexicographically smallest pair among equal linkages.
        std::vector<int> slots;
        for (int s = 0; s < n; ++s) {
            if (active[static_cast<std::size_t>(s)]) slots.push_back(s);
        }
        std::sort(slots.begin(), slots.end(),
                  [&](int a, int b) { return lowest[static_cast<std::size_t>(a)] < lowest[static_cast<std::size_t>(b)]; });
        for (std::size_t a = 0; a < slots.size(); ++a) {
            for (std::size_t b = a + 1; b < slots.size(); ++b) {
                const double v = dist(slots[a], slots[b]);
                if (v < best) {
                    best = v;
                    bi = slots[a];
                    bj = slots[b];
                }
            }
        }
        if (bi < 0) {
            // Only NaN distances remain; fall back to the first pair.
            bi = slots[0];
            bj = slots[1];
            best = dist(bi, bj);
        }
        out.merges.push_back({step, node[static_cast<std::size_t>(bi)], node[static_cast<std::size_t>(bj)], best});

        for (int s = 0; s < n; ++s) {
            if (!active[static_cast<std::size_t>(s)] || s == bi || s == bj) continue;
            const double v = std::max(dist(s, bi), dist(s, bj));
            dist(s, bi) = v;
            dist(bi, s) = v;
        }
        active[static_cast<std::size_t>(bj)] = false;
        node[static_cast<std::size_t>(bi)] = n + step;
        lowest[static_cast<std::size_t>(bi)] =
            std::min(lowest[static_cast<std::size_t>(bi)], lowest[static_cast<std::size_t>(bj)]);
    }
    return out;
}

ClusterAssignment Dendrogram::cut(int c) const {
    if (c < 1 || c > leaf_count) {
        throw DomainError("cluster count " + std::to_string(c) + " outside [1, " + std::to_string(leaf_count) + "]");
    }
    const auto n = static_cast<std::size_t>(leaf_count);
    // Union-find over node ids; each merged node points at its parent representative.
    std::vector<int> parent(2 * n, -1);
    const auto merge_count = static_cast<std::size_t>(leaf_count - c);
    for (std::size_t s = 0; s < merge_count; ++s) {
        const Merge& m = merges[s];
        parent[static_cast<std::size_t>(m.left)] = static_cast<int>(n + s);
        parent[static_cast<std::size_t>(m.right)] = static_cast<int>(n + s);
    }
    auto root = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] >= 0) v = parent[static_cast<std::size_t>(v)];
        return v;
    };

    ClusterAssignment out;
    out.labels.assign(n, -1);
    std::vector<int> id_of_root(2 * n, -1);
    int next = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int r = root(static_cast<int>(i));
        if (id_of_root[static_cast<std::size_t>(r)] < 0) id_of_root[static_cast<std::size_t>(r)] = next++;
        out.labels[i] = id_of_root[static_cast<std::size_t>(r)];
    }

    // Ids were handed out by smallest member, so id order already breaks size ties.
    out.order.resize(static_cast<std::size_t>(next));
    std::iota(out.order.begin(), out.order.end(), 0);
    const auto sizes = out.sizes();
    std::stable_sort(out.order.begin(), out.order.end(), [&](int a, int b) {
        return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
    });
    return out;
}

ClusterAssignment complete_linkage_cluster(const SymMatrix& dissimilarity, int c) {
    const auto n = static_cast<int>(dissimilarity.size());
    if (c < 1 || c > n) {
        throw DomainError("cluster count " + std::to_string(c) + " outside [1, " + std::to_string(n) + "]");
    }
    return complete_linkage_dendrogram(dissimilarity).cut(c);
}

}  // namespace crsir
