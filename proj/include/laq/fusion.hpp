#pragma once

#include "laq/laqops.hpp"
#include "laq/mlops.hpp"

namespace laq::fusion {

// Pre-fused per-dimension partial products B_j M_j L. Applying the row
// matching matrices and summing reproduces the non-fused prediction
// T L = sum_j I_j (B_j M_j L).
struct FusedLinear {
  std::vector<DenseMat> partials;  // r_j x l each
  index_t out_width = 0;
};

FusedLinear prefuse_linear(std::span<const DenseMat> dims, std::span<const ops::ColumnMap> col_maps,
                           const ml::LinearOperator& op);
DenseMat apply_fused_linear(std::span<const SparseCsr> i_maps, const FusedLinear& f);

// Per-dimension slice of a tensorized tree: the nodes whose feature that
// dimension owns, in global node order. Stacking path_rows blocks back in
// node order reconstitutes H.
struct TreeDimBlock {
  SparseCsr feature_map;          // k x p_j, columns restricted to owned nodes
  std::vector<double> thresholds;  // p_j
  DenseMat path_rows;              // p_j x l
  std::vector<index_t> node_ids;   // global node positions, ascending
};

// Splits the tree's node set by the dimension owning each feature. Every
// feature used by the tree must map to a dimension in [0, dim_count).
std::vector<TreeDimBlock> partition_tree(const ml::TreeLA& m,
                                         std::span<const index_t> feature_owner,
                                         index_t dim_count);

// Per-dimension partial score matrices T_j = ((B_j M_j F_j) > v_j) H_j; the
// summed scores are compared against h to decode leaf labels.
struct FusedTree {
  std::vector<DenseMat> partials;  // r_j x l each
  std::vector<double> path_score;
  std::vector<std::int64_t> labels;
};

FusedTree prefuse_tree(std::span<const DenseMat> dims, std::span<const ops::ColumnMap> col_maps,
                       std::span<const TreeDimBlock> parts, std::span<const double> path_score,
                       std::span<const std::int64_t> labels);
std::vector<std::int64_t> apply_fused_tree(std::span<const SparseCsr> i_maps, const FusedTree& f);

// Recompute one dimension's partial after that table changed; all other
// partials are carried over untouched.
FusedLinear refresh_partial(FusedLinear f, index_t dim_index, const DenseMat& new_dim,
                            const ops::ColumnMap& col_map, const ml::LinearOperator& op);
FusedTree refresh_partial(FusedTree f, index_t dim_index, const DenseMat& new_dim,
                          const ops::ColumnMap& col_map, const TreeDimBlock& part);

// Inputs of the fusion cost model. All counts must be positive.
struct CostInputs {
  std::int64_t target_rows = 0;    // i
  std::int64_t input_width = 0;    // k
  std::int64_t output_width = 0;   // l
  std::int64_t tree_features = 0;  // p; the tree ratio assumes p == k
  std::vector<std::int64_t> dim_rows;

  double sum_dim_rows() const;
};

// Dense-arithmetic complexity ratio of non-fused over fused evaluation for a
// linear operator:  ((i k + k^2/3) sum_r + i k l) / (i l sum_r).
double speedup_ratio_linear(const CostInputs& c);

// Same ratio for a tensorized tree with p == k:
//   k/l + k^2/(3 i l) + k^2/(l sum_r) + k/sum_r + k/(l sum_r) + 1/sum_r.
double speedup_ratio_tree(const CostInputs& c);

// Fuse only when the predicted ratio strictly exceeds the threshold.
bool decide_fusion(double ratio, double threshold = 1.0);

}  // namespace laq::fusion
