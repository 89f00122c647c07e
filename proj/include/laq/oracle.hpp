#pragma once

#include <string>
#include <utility>
#include <vector>

#include "laq/mlops.hpp"
#include "laq/storage.hpp"

// Plain reference implementations used only to check the LA engine. These
// deliberately share no kernel code with laqops/mlops/fusion: joins are hash
// joins, aggregation is a hash map, tree inference walks the tree.
namespace laq::oracle {

// All matching (r row, s row) index pairs, cross pairs included, ordered by
// (r index, s index).
std::vector<std::pair<index_t, index_t>> hash_join(const Table& r, const Table& s,
                                                   std::string_view r_key,
                                                   std::string_view s_key);

struct GroupRow {
  std::vector<std::int64_t> keys;
  double sum = 0;

  bool operator==(const GroupRow&) const = default;
};

// Group sums keyed by tuple, ascending tuple order.
std::vector<GroupRow> hash_aggregate(std::span<const IntColumn> group_cols,
                                     std::span<const double> values);

std::int64_t traverse_tree(const ml::TreeModel& t, std::span<const double> row);

struct DimRef {
  const Table* dim = nullptr;
  std::string fk_col;
  std::string pk_col;
};

// Matched row tuples of a star join evaluated as sequential hash joins with
// intermediate materialization. Tuple order follows fact order, expanding
// multi-matches in dim row order.
struct StarMatch {
  std::vector<index_t> fact_rows;
  std::vector<std::vector<index_t>> dim_rows;  // one vector per dim, aligned

  index_t row_count() const { return static_cast<index_t>(fact_rows.size()); }
};

StarMatch star_join(const Table& fact, std::span<const DimRef> dims);

// Star join then model evaluation over the gathered per-dimension feature
// columns. With no model the materialized feature table itself is returned.
struct PipelineOutput {
  DenseMat values;
  std::vector<std::int64_t> labels;
};

PipelineOutput star_pipeline(const Table& fact, std::span<const DimRef> dims,
                             std::span<const std::vector<std::string>> dim_features,
                             const ml::TreeModel* tree, const ml::LinearOperator* linear);

}  // namespace laq::oracle
