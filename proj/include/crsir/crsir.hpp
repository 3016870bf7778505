#pragma once

#include "crsir/clustering.hpp"
#include "crsir/numerics.hpp"
#include "crsir/sir.hpp"

#include <span>
#include <string>
#include <vector>

namespace crsir {

/// Blocks after sequential projection onto the orthogonal complement of earlier blocks.
struct OrthogonalizedBlocks {
    /// Original variable indices of each block, blocks in processing order.
    std::vector<std::vector<int>> members;
    /// Transformed T-by-N_i block data, same order as `members`.
    std::vector<Matrix> blocks;
    /// Per block, which columns were projected out entirely and zeroed.
    std::vector<std::vector<bool>> degenerate;
    /// Orthonormal basis accumulated over all blocks; block i was projected against
    /// its first `basis_rank_before[i]` columns.
    Matrix basis;
    std::vector<Eigen::Index> basis_rank_before;
    /// N-by-N map with transformed data = standardized data * replay; columns sit at the
    /// original variable positions. Replays the projection on new observations.
    Matrix replay;

    /// The accumulated basis used to project block `i` (empty for the first block).
    [[nodiscard]] Matrix projector(std::size_t i) const { return basis.leftCols(basis_rank_before.at(i)); }
};

OrthogonalizedBlocks orthogonalize_blocks(const DataMatrix& standardized, const ClusterAssignment& assignment);

struct CrsirOptions {
    int clusters = 1;
    double tau = 0.0;
    /// 0 picks min(10, floor(T / 4)).
    int slices = 0;
    double alpha = 0.05;
};

/// Fitted pipeline: standardize, orthogonalize, Lambda' x, Gamma' (.), linear head.
struct CrsirModel {
    std::vector<std::string> column_names;
    StandardizationParams standardization;
    ClusterAssignment assignment;
    Matrix orthogonalizer;
    /// Directions kept per block, blocks in processing order.
    std::vector<int> block_dims;
    /// N-by-m; column l is nonzero only on its own cluster's variables.
    Matrix lambda;
    /// m-by-v second-stage directions.
    Matrix gamma;
    /// Intercept followed by v slopes.
    Vector head;
    double tau = 0.0;
    int clusters = 1;
    int slices = 0;
    double alpha = 0.05;

    [[nodiscard]] Eigen::Index input_dim() const noexcept { return standardization.mean.size(); }
    [[nodiscard]] Eigen::Index variate_count() const noexcept { return gamma.cols(); }

    /// Gamma' Lambda' x* for each row of `x`.
    [[nodiscard]] Matrix transform(const Matrix& x) const;
    [[nodiscard]] Vector predict(const Matrix& x) const;
};

/// Standardization plus the full dendrogram of a training sample. Every cluster count and
/// shrinkage value can be fitted from one preparation.
struct CrsirPreparation {
    Standardized standardized;
    Dendrogram dendrogram;
};

CrsirPreparation crsir_prepare(const DataMatrix& x);

/// Partition, orthogonalized blocks and per-block SIR moments for one cluster count and
/// response. Everything here is shared across tau values.
struct BlockDesign {
    ClusterAssignment assignment;
    OrthogonalizedBlocks blocks;
    int slice_count = 0;
    SliceSpec slices;
    /// Per block, original indices of the non-degenerate columns and their transformed data.
    std::vector<std::vector<int>> active_vars;
    std::vector<Matrix> active;
    /// Per block, SIR moments of `active` (only filled for blocks with two or more columns).
    std::vector<SirMoments> moments;
};

/// `slices` of 0 picks the default count for the sample size.
BlockDesign crsir_block_design(const CrsirPreparation& prep, int clusters, std::span<const double> y, int slices);

CrsirModel crsir_fit_design(const CrsirPreparation& prep, const BlockDesign& design, std::span<const double> y,
                            double tau, double alpha);

CrsirModel crsir_fit(const DataMatrix& x, std::span<const double> y, const CrsirOptions& options);

inline Matrix crsir_transform(const CrsirModel& model, const Matrix& x) { return model.transform(x); }
inline Vector crsir_predict(const CrsirModel& model, const Matrix& x) { return model.predict(x); }

}  // namespace crsir
