#pragma once

#include "laq/mlops.hpp"
#include "laq/predicate.hpp"
#include "laq/storage.hpp"

namespace laq::bench {

// Cardinality setting S1/S2 for the synthetic star, Ssb for the full-size
// star (adds the customer dimension). part scales by bit_width(sf) =
// floor(1 + log2 sf).
enum class Setting { S1, S2, Ssb };

struct GenConfig {
  std::int64_t sf = 1;
  Setting setting = Setting::S2;
  std::uint64_t seed = 42;
  index_t feature_width = 0;       // float feature columns spread over part/supplier/date
  double dangling_fraction = 0.0;  // fraction of fact fks pointing at no dim row
  std::int64_t max_bytes = 4ll << 30;
};

struct Cardinalities {
  std::int64_t lineorder = 0;
  std::int64_t part = 0;
  std::int64_t supplier = 0;
  std::int64_t customer = 0;  // Ssb only
  std::int64_t date = 0;
};

Cardinalities planned_cardinalities(const GenConfig& cfg);

StarSchema gen_star(const GenConfig& cfg);
StarSchema gen_ssb_scale(const GenConfig& cfg);

// ---------------------------------------------------------------------------
// Query workload
// ---------------------------------------------------------------------------

enum class QueryGroup { G1 = 1, G2 = 2, G3 = 3, G4 = 4 };

// target == -1 refers to the fact table, otherwise it indexes
// QuerySpec::joins and scopes the filter/group column to that join's copy of
// the dimension (two joins may share one dimension table).
struct FilterSpec {
  int target = -1;
  std::string column;
  Predicate pred;
};

struct GroupRef {
  int target = 0;
  std::string column;
};

struct QuerySpec {
  std::string id;
  QueryGroup group = QueryGroup::G1;
  std::vector<StarLink> joins;
  std::vector<FilterSpec> filters;
  std::string measure;
  std::vector<GroupRef> group_by;  // empty: plain Sum
  bool order_by = false;
  double target_selectivity = 0;
  double realized_selectivity = 0;
};

// Three parameterized queries for the group, filter constants tuned on the
// given data so realized selectivity lands within +-20% of target (GenError
// when no constant attains that). Targets default per group.
std::vector<QuerySpec> gen_queries(const StarSchema& data, QueryGroup group,
                                   std::span<const double> selectivity_targets = {});

// Selectivity of a query over the data (fraction of fact rows surviving all
// filters and joins), counted row by row.
double measure_selectivity(const StarSchema& data, const QuerySpec& q);

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

// Balanced-ish random tree: repeatedly splits a random shallowest leaf, so
// depth stays at ceil(log2 leaves). Node features are drawn from the first p
// of k input columns, distinct while the node budget allows.
ml::TreeModel gen_tree(index_t k, index_t p, index_t leaves, std::uint64_t seed);

ml::LinearOperator gen_linear(index_t k, index_t l, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Feature layout
// ---------------------------------------------------------------------------

// Global model-input layout: the float feature columns of part, supplier and
// date concatenated in that order.
struct FeatureLayout {
  std::vector<std::string> dim_names;
  std::vector<std::vector<std::string>> dim_feature_cols;
  std::vector<index_t> offsets;        // global start of each dim's slice
  std::vector<index_t> feature_owner;  // global feature index -> dim index
  index_t total = 0;
};

FeatureLayout feature_layout(const StarSchema& schema);

}  // namespace laq::bench
