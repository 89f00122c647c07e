#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "laq/matrix.hpp"
#include "laq/predicate.hpp"
#include "laq/storage.hpp"

namespace laq::ops {

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

// One-hot column mapping matrix M (source-cols x target-cols). Right-
// multiplying a table matrix by M gathers/places columns. A full map claims
// every target column exactly once; a placement map may leave target columns
// empty (used when several dimension blocks share one target layout).
struct ColumnMap {
  SparseCsr mat;
};

ColumnMap build_column_map(index_t source_cols,
                           std::span<const std::pair<index_t, index_t>> mapping);
ColumnMap build_placement_map(index_t source_cols, index_t target_cols,
                              std::span<const std::pair<index_t, index_t>> mapping);

DenseMat project(const DenseMat& t, const ColumnMap& m);

// ---------------------------------------------------------------------------
// Selection
// ---------------------------------------------------------------------------

struct SelectionMask {
  std::vector<bool> bits;

  index_t size() const { return static_cast<index_t>(bits.size()); }
  index_t count() const;
};

SelectionMask build_selection_mask(const IntColumn& col, const Predicate& pred);
SelectionMask build_selection_mask(const FloatColumn& col, const Predicate& pred);
SelectionMask mask_and(const SelectionMask& a, const SelectionMask& b);

Table apply_mask(const Table& t, const SelectionMask& mask);
DenseMat apply_mask(const DenseMat& t, const SelectionMask& mask);

// ---------------------------------------------------------------------------
// Key domains and key matrices
// ---------------------------------------------------------------------------

// Sorted distinct union of join keys; the shared column space of the one-hot
// key matrices. Kept sorted so joining over it also realizes key ordering,
// and updatable in place of a full rebuild when new keys arrive.
struct KeyDomain {
  std::vector<std::int64_t> sorted_keys;
  std::unordered_map<std::int64_t, index_t> index;

  index_t size() const { return static_cast<index_t>(sorted_keys.size()); }
  bool contains(std::int64_t key) const { return index.count(key) != 0; }
  index_t position(std::int64_t key) const;  // DomainError if absent
};

KeyDomain build_key_domain(std::span<const std::int64_t> keys_r,
                           std::span<const std::int64_t> keys_s, bool sorted = true);
KeyDomain update_key_domain(const KeyDomain& d, std::span<const std::int64_t> new_keys);

enum class KeyOrientation { RowsByDomain, DomainByRows };

// One nonzero per input row at the key's domain position. With values
// supplied the matrix carries the column to be aggregated instead of 1.
SparseCsr key_matrix(std::span<const std::int64_t> keys, const KeyDomain& domain,
                     KeyOrientation orientation, std::span<const double> values = {});

// ---------------------------------------------------------------------------
// Joins
// ---------------------------------------------------------------------------

// Row matching matrix I: entry (i, j) == 1 iff row i of R joins row j of S.
// nnz is the row count of the join result; COO entry order fixes the
// target-table row order.
struct RowMatch {
  SparseCoo mat;

  index_t nnz() const { return mat.nnz(); }
};

RowMatch mm_join(std::span<const std::int64_t> keys_r, std::span<const std::int64_t> keys_s);
// Cached-domain variant: domain must contain every key of both sides (it may
// be a superset, e.g. a cached domain grown by update_key_domain).
RowMatch mm_join(std::span<const std::int64_t> keys_r, std::span<const std::int64_t> keys_s,
                 const KeyDomain& domain);

struct DimJoinSpec {
  const Table* dim = nullptr;
  std::string fk_col;
  std::string pk_col;
};

// Wall-clock seconds spent in each phase of join evaluation, accumulated
// across calls; feeds the per-stage CLI breakdown.
struct JoinStageTimes {
  double domain_gen = 0;
  double construct = 0;
  double spmm = 0;
};

// Star join of a fact table against several dimensions without materializing
// intermediates. Fact rows that miss any dimension are dropped; each
// returned I_j maps surviving target row m to its unique dim-j row, and all
// I_j agree on the target row order. Requires unique dimension keys.
std::vector<RowMatch> multiway_star_join(const Table& fact, std::span<const DimJoinSpec> dims,
                                         std::vector<index_t>* surviving_fact_rows = nullptr,
                                         JoinStageTimes* times = nullptr,
                                         std::span<const KeyDomain> cached_domains = {});

// ---------------------------------------------------------------------------
// Materialization
// ---------------------------------------------------------------------------

// Target-row mapping matrices (nnz x r_R, nnz x r_S): row m selects the
// source row of the m-th materialized row.
std::pair<SparseCsr, SparseCsr> row_mapping_matrices(const RowMatch& i);

DenseMat materialize(std::span<const SparseCsr> i_maps, std::span<const DenseMat> table_mats,
                     std::span<const ColumnMap> col_maps);

// ---------------------------------------------------------------------------
// Aggregation and sorting
// ---------------------------------------------------------------------------

struct GroupSum {
  std::int64_t group = 0;
  double sum = 0;

  bool operator==(const GroupSum&) const = default;
};

// Join R and S on key, group by S's group column, sum R's value column.
// Evaluated as a sparse product of the valued key matrix with the
// key-to-group matrix followed by a ones reduction. Groups are the distinct
// group_s values in ascending order; unmatched groups report sum 0.
std::vector<GroupSum> groupby_sum_single(std::span<const std::int64_t> keys_r,
                                         std::span<const double> vals_r,
                                         std::span<const std::int64_t> keys_s,
                                         std::span<const std::int64_t> group_s);

struct TupleSum {
  std::vector<std::int64_t> group;
  double sum = 0;

  bool operator==(const TupleSum&) const = default;
};

// Multi-column group-by via sort-unique over the tuple rows plus segmented
// accumulation. Output ordered by ascending group tuple.
std::vector<TupleSum> groupby_sum_multi(std::span<const IntColumn> group_cols,
                                        std::span<const double> vals);

enum class SortDir { Asc, Desc };

DenseMat sort_rows(const DenseMat& t, std::span<const index_t> key_cols,
                   std::span<const SortDir> directions);

}  // namespace laq::ops
