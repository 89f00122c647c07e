#include "laq/oracle.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace laq::oracle {

std::vector<std::pair<index_t, index_t>> hash_join(const Table& r, const Table& s,
                                                   std::string_view r_key,
                                                   std::string_view s_key) {
  const IntColumn& rk = r.ints(r_key);
  const IntColumn& sk = s.ints(s_key);

  std::unordered_map<std::int64_t, std::vector<index_t>> build;
  build.reserve(sk.size());
  for (std::size_t j = 0; j < sk.size(); ++j) build[sk[j]].push_back(static_cast<index_t>(j));

  std::vector<std::pair<index_t, index_t>> out;
  for (std::size_t i = 0; i < rk.size(); ++i) {
    const auto it = build.find(rk[i]);
    if (it == build.end()) continue;
    for (index_t j : it->second) out.emplace_back(static_cast<index_t>(i), j);
  }
  // Probe order already yields ascending r; s indexes were inserted ascending.
  return out;
}

std::vector<GroupRow> hash_aggregate(std::span<const IntColumn> group_cols,
                                     std::span<const double> values) {
  if (group_cols.empty()) throw ShapeError("hash_aggregate: no group columns");
  for (const IntColumn& col : group_cols)
    if (col.size() != values.size()) throw ShapeError("hash_aggregate: column length mismatch");

  std::map<std::vector<std::int64_t>, double> acc;
  std::vector<std::int64_t> key(group_cols.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t c = 0; c < group_cols.size(); ++c) key[c] = group_cols[c][i];
    acc[key] += values[i];
  }

  std::vector<GroupRow> out;
  out.reserve(acc.size());
  for (auto& [k, sum] : acc) out.push_back({k, sum});
  return out;
}

std::int64_t traverse_tree(const ml::TreeModel& t, std::span<const double> row) {
  if (t.nodes.empty()) throw TreeError("tree has no nodes");
  index_t id = 0;
  for (std::size_t steps = 0; steps <= t.nodes.size(); ++steps) {
    const ml::TreeNode& node = t.nodes[id];
    if (node.is_leaf) return node.label;
    if (node.feature < 0 || node.feature >= static_cast<index_t>(row.size()))
      throw TreeError("tree feature out of range");
    id = row[node.feature] > node.threshold ? node.true_child : node.false_child;
    if (id < 0 || id >= static_cast<index_t>(t.nodes.size()))
      throw TreeError("tree child out of range");
  }
  throw TreeError("tree traversal did not terminate");
}

StarMatch star_join(const Table& fact, std::span<const DimRef> dims) {
  std::vector<std::unordered_map<std::int64_t, std::vector<index_t>>> lookup(dims.size());
  for (std::size_t j = 0; j < dims.size(); ++j) {
    const IntColumn& pk = dims[j].dim->ints(dims[j].pk_col);
    for (std::size_t row = 0; row < pk.size(); ++row)
      lookup[j][pk[row]].push_back(static_cast<index_t>(row));
  }

  StarMatch match;
  match.dim_rows.resize(dims.size());

  std::vector<const IntColumn*> fks;
  fks.reserve(dims.size());
  for (const DimRef& d : dims) fks.push_back(&fact.ints(d.fk_col));

  // Expand one fact row at a time, dim by dim (the materialized-intermediate
  // order of a left-deep hash join plan).
  std::vector<std::vector<index_t>> tuple(dims.size());
  for (index_t i = 0; i < fact.row_count(); ++i) {
    bool alive = true;
    for (std::size_t j = 0; j < dims.size() && alive; ++j) {
      const auto it = lookup[j].find((*fks[j])[i]);
      if (it == lookup[j].end())
        alive = false;
      else
        tuple[j] = it->second;
    }
    if (!alive) continue;
    std::vector<std::size_t> pick(dims.size(), 0);
    bool more = true;
    while (more) {
      match.fact_rows.push_back(i);
      for (std::size_t j = 0; j < dims.size(); ++j)
        match.dim_rows[j].push_back(tuple[j][pick[j]]);
      // Odometer over the match lists, last dim fastest.
      more = false;
      for (std::size_t j = dims.size(); j-- > 0;) {
        if (++pick[j] < tuple[j].size()) {
          more = true;
          break;
        }
        pick[j] = 0;
      }
    }
  }
  return match;
}

PipelineOutput star_pipeline(const Table& fact, std::span<const DimRef> dims,
                             std::span<const std::vector<std::string>> dim_features,
                             const ml::TreeModel* tree, const ml::LinearOperator* linear) {
  if (dim_features.size() != dims.size()) throw ShapeError("star_pipeline: feature list lengths");
  const StarMatch match = star_join(fact, dims);

  index_t width = 0;
  for (const auto& cols : dim_features) width += static_cast<index_t>(cols.size());

  DenseMat features(match.row_count(), width);
  for (index_t m = 0; m < match.row_count(); ++m) {
    index_t c = 0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
      const Table& dim = *dims[j].dim;
      const index_t row = match.dim_rows[j][m];
      for (const std::string& name : dim_features[j])
        features(m, c++) = dim.value_as_double(row, dim.schema().index_of(name));
    }
  }

  PipelineOutput out;
  if (tree) {
    out.labels.reserve(match.row_count());
    for (index_t m = 0; m < match.row_count(); ++m)
      out.labels.push_back(traverse_tree(*tree, {features.row(m), static_cast<std::size_t>(width)}));
  } else if (linear) {
    const DenseMat& w = linear->mat;
    if (w.rows() != width) throw ShapeError("star_pipeline: operator width mismatch");
    out.values = DenseMat(match.row_count(), w.cols());
    for (index_t m = 0; m < match.row_count(); ++m)
      for (index_t c = 0; c < w.cols(); ++c) {
        double dot = 0;
        for (index_t f = 0; f < width; ++f) dot += features(m, f) * w(f, c);
        out.values(m, c) = dot;
      }
  } else {
    out.values = std::move(features);
  }
  return out;
}

}  // namespace laq::oracle
