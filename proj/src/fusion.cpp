#include "laq/fusion.hpp"

#include <cmath>

namespace laq::fusion {

namespace {

// Placement maps must tile the global feature layout: one owner per target
// column, jointly covering all of them.
void check_placements(std::span<const ops::ColumnMap> col_maps, index_t global_width) {
  index_t claimed_total = 0;
  std::vector<char> claimed(static_cast<std::size_t>(global_width), 0);
  for (const ops::ColumnMap& m : col_maps) {
    if (m.mat.cols != global_width) throw ShapeError("fusion: placement target width mismatch");
    for (index_t tgt : m.mat.col_idx) {
      if (claimed[tgt]) throw MappingError("fusion: overlapping target column " + std::to_string(tgt));
      claimed[tgt] = 1;
    }
    claimed_total += m.mat.nnz();
  }
  if (claimed_total != global_width)
    throw ShapeError("fusion: placements claim " + std::to_string(claimed_total) +
                     " of " + std::to_string(global_width) + " feature columns");
}

void add_inplace(DenseMat& acc, const DenseMat& x) {
  for (std::size_t i = 0; i < acc.data().size(); ++i) acc.data()[i] += x.data()[i];
}

DenseMat linear_partial(const DenseMat& dim, const ops::ColumnMap& col_map,
                        const ml::LinearOperator& op) {
  if (dim.cols() != col_map.mat.rows) throw ShapeError("fusion: column map does not fit dim table");
  // B (M L): the placement picks this dimension's row block out of L.
  return dense_matmul(dim, spmm_dense(col_map.mat, op.mat));
}

DenseMat tree_partial(const DenseMat& dim, const ops::ColumnMap& col_map,
                      const TreeDimBlock& part) {
  if (dim.cols() != col_map.mat.rows) throw ShapeError("fusion: column map does not fit dim table");
  DenseMat local = dense_times_csr(dim, spmm(col_map.mat, part.feature_map));
  for (index_t i = 0; i < local.rows(); ++i)
    for (index_t j = 0; j < local.cols(); ++j)
      local(i, j) = local(i, j) > part.thresholds[j] ? 1.0 : 0.0;
  return dense_matmul(local, part.path_rows);
}

}  // namespace

FusedLinear prefuse_linear(std::span<const DenseMat> dims, std::span<const ops::ColumnMap> col_maps,
                           const ml::LinearOperator& op) {
  if (dims.empty() || dims.size() != col_maps.size())
    throw ShapeError("prefuse_linear: dim/map list lengths");
  check_placements(col_maps, op.mat.rows());

  FusedLinear f;
  f.out_width = op.mat.cols();
  f.partials.reserve(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j)
    f.partials.push_back(linear_partial(dims[j], col_maps[j], op));
  return f;
}

DenseMat apply_fused_linear(std::span<const SparseCsr> i_maps, const FusedLinear& f) {
  if (i_maps.empty() || i_maps.size() != f.partials.size())
    throw ShapeError("apply_fused_linear: map/partial list lengths");
  const index_t rows = i_maps[0].rows;
  for (std::size_t j = 0; j < i_maps.size(); ++j) {
    if (i_maps[j].rows != rows) throw ShapeError("apply_fused_linear: row counts differ");
    if (f.partials[j].cols() != f.out_width) throw ShapeError("apply_fused_linear: partial width");
  }

  DenseMat out = spmm_dense(i_maps[0], f.partials[0]);
  for (std::size_t j = 1; j < i_maps.size(); ++j)
    add_inplace(out, spmm_dense(i_maps[j], f.partials[j]));
  return out;
}

std::vector<TreeDimBlock> partition_tree(const ml::TreeLA& m,
                                         std::span<const index_t> feature_owner,
                                         index_t dim_count) {
  const index_t k = m.feature_width();
  const index_t p = m.node_count();
  if (static_cast<index_t>(feature_owner.size()) != k)
    throw MappingError("partition_tree: ownership list must cover all " + std::to_string(k) +
                       " features");

  // Column j of F is one-hot on the feature node j tests.
  std::vector<index_t> node_feature(static_cast<std::size_t>(p), -1);
  for (index_t feat = 0; feat < k; ++feat)
    for (index_t jj = m.feature_map.row_ptr[feat]; jj < m.feature_map.row_ptr[feat + 1]; ++jj)
      node_feature[m.feature_map.col_idx[jj]] = feat;

  std::vector<TreeDimBlock> blocks(static_cast<std::size_t>(dim_count));
  for (index_t node = 0; node < p; ++node) {
    const index_t feat = node_feature[node];
    const index_t owner = feature_owner[feat];
    if (owner < 0 || owner >= dim_count)
      throw MappingError("partition_tree: feature " + std::to_string(feat) + " has no owning dim");
    blocks[owner].node_ids.push_back(node);
  }

  const index_t l = m.leaf_count();
  for (TreeDimBlock& block : blocks) {
    const index_t pj = static_cast<index_t>(block.node_ids.size());
    std::vector<Triplet> trips;
    trips.reserve(pj);
    block.thresholds.reserve(pj);
    block.path_rows = DenseMat(pj, l);
    for (index_t local = 0; local < pj; ++local) {
      const index_t node = block.node_ids[local];
      trips.push_back({node_feature[node], local, 1.0});
      block.thresholds.push_back(m.thresholds[node]);
      for (index_t j = 0; j < l; ++j) block.path_rows(local, j) = m.paths(node, j);
    }
    block.feature_map = csr_from_triplets(k, pj, trips);
  }
  return blocks;
}

FusedTree prefuse_tree(std::span<const DenseMat> dims, std::span<const ops::ColumnMap> col_maps,
                       std::span<const TreeDimBlock> parts, std::span<const double> path_score,
                       std::span<const std::int64_t> labels) {
  if (dims.empty() || dims.size() != col_maps.size() || dims.size() != parts.size())
    throw ShapeError("prefuse_tree: input list lengths");
  if (path_score.size() != labels.size()) throw ShapeError("prefuse_tree: score/label lengths");
  if (!col_maps.empty()) check_placements(col_maps, col_maps[0].mat.cols);

  FusedTree f;
  f.path_score.assign(path_score.begin(), path_score.end());
  f.labels.assign(labels.begin(), labels.end());
  f.partials.reserve(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j)
    f.partials.push_back(tree_partial(dims[j], col_maps[j], parts[j]));
  return f;
}

std::vector<std::int64_t> apply_fused_tree(std::span<const SparseCsr> i_maps, const FusedTree& f) {
  if (i_maps.empty() || i_maps.size() != f.partials.size())
    throw ShapeError("apply_fused_tree: map/partial list lengths");

  DenseMat scores = spmm_dense(i_maps[0], f.partials[0]);
  for (std::size_t j = 1; j < i_maps.size(); ++j)
    add_inplace(scores, spmm_dense(i_maps[j], f.partials[j]));

  std::vector<std::int64_t> out(static_cast<std::size_t>(scores.rows()));
  for (index_t i = 0; i < scores.rows(); ++i) {
    index_t hit = -1;
    for (index_t j = 0; j < scores.cols(); ++j) {
      if (scores(i, j) == f.path_score[j]) {
        if (hit >= 0) throw ModelError("apply_fused_tree: row " + std::to_string(i) + " matches several leaves");
        hit = j;
      }
    }
    if (hit < 0) throw ModelError("apply_fused_tree: row " + std::to_string(i) + " matches no leaf");
    out[i] = f.labels[hit];
  }
  return out;
}

FusedLinear refresh_partial(FusedLinear f, index_t dim_index, const DenseMat& new_dim,
                            const ops::ColumnMap& col_map, const ml::LinearOperator& op) {
  if (dim_index < 0 || dim_index >= static_cast<index_t>(f.partials.size()))
    throw IndexError("refresh_partial: dim index out of range");
  if (op.mat.cols() != f.out_width) throw ShapeError("refresh_partial: operator width changed");
  f.partials[dim_index] = linear_partial(new_dim, col_map, op);
  return f;
}

FusedTree refresh_partial(FusedTree f, index_t dim_index, const DenseMat& new_dim,
                          const ops::ColumnMap& col_map, const TreeDimBlock& part) {
  if (dim_index < 0 || dim_index >= static_cast<index_t>(f.partials.size()))
    throw IndexError("refresh_partial: dim index out of range");
  DenseMat partial = tree_partial(new_dim, col_map, part);
  if (partial.cols() != static_cast<index_t>(f.path_score.size()))
    throw ShapeError("refresh_partial: leaf count changed");
  f.partials[dim_index] = std::move(partial);
  return f;
}

double CostInputs::sum_dim_rows() const {
  double s = 0;
  for (std::int64_t r : dim_rows) s += static_cast<double>(r);
  return s;
}

namespace {

void check_cost_inputs(const CostInputs& c) {
  if (c.target_rows <= 0 || c.input_width <= 0 || c.output_width <= 0 || c.tree_features <= 0)
    throw DomainError("cost model: all inputs must be positive");
  if (c.dim_rows.empty()) throw DomainError("cost model: no dimension rows");
  for (std::int64_t r : c.dim_rows)
    if (r <= 0) throw DomainError("cost model: all inputs must be positive");
}

}  // namespace

double speedup_ratio_linear(const CostInputs& c) {
  check_cost_inputs(c);
  const double i = static_cast<double>(c.target_rows);
  const double k = static_cast<double>(c.input_width);
  const double l = static_cast<double>(c.output_width);
  const double sum_r = c.sum_dim_rows();
  const double denom = i * l * sum_r;
  if (denom == 0.0) throw DomainError("cost model: zero denominator");
  return ((i * k + k * k / 3.0) * sum_r + i * k * l) / denom;
}

double speedup_ratio_tree(const CostInputs& c) {
  check_cost_inputs(c);
  const double i = static_cast<double>(c.target_rows);
  const double k = static_cast<double>(c.input_width);
  const double l = static_cast<double>(c.output_width);
  const double sum_r = c.sum_dim_rows();
  if (i * l * sum_r == 0.0) throw DomainError("cost model: zero denominator");
  return k / l + k * k / (3.0 * i * l) + k * k / (l * sum_r) + k / sum_r + k / (l * sum_r) +
         1.0 / sum_r;
}

bool decide_fusion(double ratio, double threshold) {
  if (!std::isfinite(ratio)) throw DomainError("decide_fusion: ratio not finite");
  return ratio > threshold;
}

}  // namespace laq::fusion
