#include "laq/benchgen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "laq/rng.hpp"

namespace laq::bench {

namespace {

// Value ranges of the generated attribute columns; query tuning relies on
// these being uniform.
constexpr std::int64_t kCategoryRange = 25;
constexpr std::int64_t kBrandRange = 40;
constexpr std::int64_t kSizeRange = 1000;
constexpr std::int64_t kRegionRange = 5;
constexpr std::int64_t kNationRange = 25;
constexpr std::int64_t kCityRange = 250;
constexpr std::int64_t kRankRange = 1000;
constexpr std::int64_t kYearLo = 1992, kYearHi = 1999;
constexpr std::int64_t kDayRange = 365;
constexpr std::int64_t kDateRows = std::int64_t{7} * 365;

IntColumn iota_col(std::int64_t n) {
  IntColumn col(static_cast<std::size_t>(n));
  std::iota(col.begin(), col.end(), std::int64_t{0});
  return col;
}

IntColumn uniform_col(Rng& rng, std::int64_t n, std::int64_t lo, std::int64_t hi) {
  IntColumn col(static_cast<std::size_t>(n));
  for (auto& v : col) v = rng.range(lo, hi);
  return col;
}

FloatColumn unit_col(Rng& rng, std::int64_t n) {
  FloatColumn col(static_cast<std::size_t>(n));
  for (auto& v : col) v = rng.unit();
  return col;
}

// Foreign keys against a dense [0, dim_rows) key space; a dangling fraction
// draws from [dim_rows, 2*dim_rows) instead, which never matches.
IntColumn fk_col(Rng& rng, std::int64_t n, std::int64_t dim_rows, double dangling) {
  IntColumn col(static_cast<std::size_t>(n));
  for (auto& v : col) {
    const bool miss = dangling > 0.0 && rng.unit() < dangling;
    v = rng.range(0, dim_rows) + (miss ? dim_rows : 0);
  }
  return col;
}

std::vector<index_t> split_features(index_t k, std::size_t parts) {
  std::vector<index_t> out(parts, k / static_cast<index_t>(parts));
  for (index_t i = 0; i < k % static_cast<index_t>(parts); ++i) ++out[i];
  return out;
}

Table make_dim(const std::string& name, char prefix, std::int64_t rows, index_t features,
               std::uint64_t seed) {
  Rng rng(derive_seed(seed, name));
  Schema schema;
  std::vector<Column> cols;
  const std::string p(1, prefix);

  schema.columns.emplace_back(p + "_key", ColKind::Key);
  cols.emplace_back(iota_col(rows));
  if (name == "date") {
    schema.columns.emplace_back("d_year", ColKind::Int);
    cols.emplace_back(uniform_col(rng, rows, kYearLo, kYearHi));
    schema.columns.emplace_back("d_month", ColKind::Int);
    cols.emplace_back(uniform_col(rng, rows, 1, 13));
    schema.columns.emplace_back("d_dayofyear", ColKind::Int);
    cols.emplace_back(uniform_col(rng, rows, 0, kDayRange));
  } else if (name == "part") {
    schema.columns.emplace_back("p_category", ColKind::Int);
    cols.emplace_back(uniform_col(rng, rows, 0, kCategoryRange));
    schema.columns.emplace_back("p_brand", ColKind::Int);
    cols.emplace_back(uniform_col(rng, rows, 0, kBrandRange));
    schema.columns.emplace_back("p_size", ColKind::Int);
    cols.emplace_back(uniform_col(rng, rows, 0, kSizeRange));
  } else {  // supplier / customer
    schema.columns.emplace_back(p + "_region", ColKind::Int);
    cols.emplace_back(uniform_col(rng, rows, 0, kRegionRange));
    schema.columns.emplace_back(p + "_nation", ColKind::Int);
    cols.emplace_back(uniform_col(rng, rows, 0, kNationRange));
    schema.columns.emplace_back(p + "_city", ColKind::Int);
    cols.emplace_back(uniform_col(rng, rows, 0, kCityRange));
    schema.columns.emplace_back(p + "_rank", ColKind::Int);
    cols.emplace_back(uniform_col(rng, rows, 0, kRankRange));
  }
  for (index_t f = 0; f < features; ++f) {
    schema.columns.emplace_back(p + "_f" + std::to_string(f), ColKind::Float);
    cols.emplace_back(unit_col(rng, rows));
  }
  return Table(std::move(schema), std::move(cols));
}

StarSchema generate(const GenConfig& cfg, bool with_customer) {
  if (cfg.sf < 1) throw GenError("scale factor must be >= 1");
  if (cfg.feature_width < 0) throw GenError("feature width must be >= 0");

  const Cardinalities card = [&] {
    GenConfig c = cfg;
    if (with_customer) c.setting = Setting::Ssb;
    return planned_cardinalities(c);
  }();

  // Capacity guard: 8 bytes per stored value, counted before allocating.
  const std::vector<index_t> feats = split_features(cfg.feature_width, 3);
  const std::int64_t fact_cols = with_customer ? 8 : 7;
  std::int64_t cells = card.lineorder * fact_cols;
  cells += card.part * (4 + feats[0]);
  cells += card.supplier * (5 + feats[1]);
  cells += card.date * (4 + feats[2]);
  if (with_customer) cells += card.customer * 5;
  if (cells * 8 > cfg.max_bytes)
    throw CapacityError("dataset needs " + std::to_string(cells * 8) + " bytes, cap is " +
                        std::to_string(cfg.max_bytes));

  std::vector<std::pair<std::string, Table>> dims;
  dims.emplace_back("part", make_dim("part", 'p', card.part, feats[0], cfg.seed));
  dims.emplace_back("supplier", make_dim("supplier", 's', card.supplier, feats[1], cfg.seed));
  dims.emplace_back("date", make_dim("date", 'd', card.date, feats[2], cfg.seed));
  if (with_customer)
    dims.emplace_back("customer", make_dim("customer", 'c', card.customer, 0, cfg.seed));

  Rng rng(derive_seed(cfg.seed, "lineorder"));
  Schema schema;
  std::vector<Column> cols;
  schema.columns.emplace_back("lo_part", ColKind::Key);
  cols.emplace_back(fk_col(rng, card.lineorder, card.part, cfg.dangling_fraction));
  schema.columns.emplace_back("lo_supplier", ColKind::Key);
  cols.emplace_back(fk_col(rng, card.lineorder, card.supplier, cfg.dangling_fraction));
  schema.columns.emplace_back("lo_orderdate", ColKind::Key);
  cols.emplace_back(fk_col(rng, card.lineorder, card.date, cfg.dangling_fraction));
  schema.columns.emplace_back("lo_commitdate", ColKind::Key);
  cols.emplace_back(fk_col(rng, card.lineorder, card.date, cfg.dangling_fraction));
  if (with_customer) {
    schema.columns.emplace_back("lo_customer", ColKind::Key);
    cols.emplace_back(fk_col(rng, card.lineorder, card.customer, cfg.dangling_fraction));
  }
  schema.columns.emplace_back("lo_quantity", ColKind::Int);
  cols.emplace_back(uniform_col(rng, card.lineorder, 1, 51));
  schema.columns.emplace_back("lo_discount", ColKind::Int);
  cols.emplace_back(uniform_col(rng, card.lineorder, 0, 11));
  schema.columns.emplace_back("lo_revenue", ColKind::Int);
  cols.emplace_back(uniform_col(rng, card.lineorder, 100, 10000));

  std::vector<StarLink> links{{"lo_part", "part", "p_key"},
                              {"lo_supplier", "supplier", "s_key"},
                              {"lo_orderdate", "date", "d_key"},
                              {"lo_commitdate", "date", "d_key"}};
  if (with_customer) links.push_back({"lo_customer", "customer", "c_key"});

  return StarSchema(Table(std::move(schema), std::move(cols)), std::move(dims), std::move(links));
}

}  // namespace

Cardinalities planned_cardinalities(const GenConfig& cfg) {
  if (cfg.sf < 1) throw GenError("scale factor must be >= 1");
  const auto log_scale =
      static_cast<std::int64_t>(std::bit_width(static_cast<std::uint64_t>(cfg.sf)));
  Cardinalities c;
  c.date = kDateRows;
  c.supplier = cfg.sf * 2000;
  switch (cfg.setting) {
    case Setting::S1:
      c.lineorder = cfg.sf * 600000;
      c.part = 20000 * log_scale;
      break;
    case Setting::S2:
      c.lineorder = cfg.sf * 3000;
      c.part = 2000 * log_scale;
      break;
    case Setting::Ssb:
      c.lineorder = cfg.sf * 6000000;
      c.part = 200000 * log_scale;
      c.customer = cfg.sf * 30000;
      break;
  }
  return c;
}

StarSchema gen_star(const GenConfig& cfg) {
  if (cfg.setting == Setting::Ssb) return generate(cfg, true);
  return generate(cfg, false);
}

StarSchema gen_ssb_scale(const GenConfig& cfg) {
  GenConfig c = cfg;
  c.setting = Setting::Ssb;
  return generate(c, true);
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

namespace {

const StarLink kPartLink{"lo_part", "part", "p_key"};
const StarLink kSupplierLink{"lo_supplier", "supplier", "s_key"};
const StarLink kOrderDateLink{"lo_orderdate", "date", "d_key"};
const StarLink kCommitDateLink{"lo_commitdate", "date", "d_key"};

// A query skeleton: fixed filters plus one integer "dial" filter
// (column < C) whose constant is searched to hit the selectivity target.
struct QueryDef {
  const char* id;
  std::vector<StarLink> joins;
  std::vector<FilterSpec> fixed;
  int dial_target;  // -1 fact, else join index
  const char* dial_column;
  std::int64_t dial_range;  // C searched over [0, range]
  std::vector<GroupRef> group_by;
  bool order_by;
};

std::vector<QueryDef> group_defs(QueryGroup group) {
  switch (group) {
    case QueryGroup::G1:
      return {
          {"11",
           {kOrderDateLink},
           {{-1, "lo_discount", Predicate::between(std::int64_t{1}, std::int64_t{3})},
            {-1, "lo_quantity", Predicate::lt(std::int64_t{25})}},
           0,
           "d_dayofyear",
           kDayRange,
           {},
           false},
          {"12",
           {kOrderDateLink},
           {{-1, "lo_discount", Predicate::between(std::int64_t{4}, std::int64_t{6})},
            {-1, "lo_quantity", Predicate::between(std::int64_t{26}, std::int64_t{35})}},
           0,
           "d_dayofyear",
           kDayRange,
           {},
           false},
          {"13",
           {kOrderDateLink},
           {{-1, "lo_discount", Predicate::between(std::int64_t{5}, std::int64_t{7})},
            {-1, "lo_quantity", Predicate::between(std::int64_t{36}, std::int64_t{40})}},
           0,
           "d_dayofyear",
           kDayRange,
           {},
           false}};
    case QueryGroup::G2:
      return {
          {"21",
           {kPartLink, kSupplierLink, kOrderDateLink},
           {{1, "s_region", Predicate::eq(std::int64_t{0})}},
           0,
           "p_size",
           kSizeRange,
           {{2, "d_year"}, {0, "p_brand"}},
           true},
          {"22",
           {kPartLink, kSupplierLink, kOrderDateLink},
           {{1, "s_region", Predicate::eq(std::int64_t{1})}},
           0,
           "p_size",
           kSizeRange,
           {{2, "d_year"}, {0, "p_brand"}},
           true},
          {"23",
           {kPartLink, kSupplierLink, kOrderDateLink},
           {{1, "s_region", Predicate::eq(std::int64_t{2})},
            {2, "d_year", Predicate::eq(std::int64_t{1994})}},
           0,
           "p_size",
           kSizeRange,
           {{2, "d_year"}, {0, "p_brand"}},
           true}};
    case QueryGroup::G3:
      return {
          {"31",
           {kPartLink, kSupplierLink, kOrderDateLink},
           {{2, "d_year", Predicate::between(std::int64_t{1992}, std::int64_t{1997})}},
           1,
           "s_rank",
           kRankRange,
           {{1, "s_nation"}, {2, "d_year"}},
           true},
          {"32",
           {kPartLink, kSupplierLink, kOrderDateLink},
           {{2, "d_year", Predicate::between(std::int64_t{1994}, std::int64_t{1996})}},
           1,
           "s_rank",
           kRankRange,
           {{1, "s_nation"}, {2, "d_year"}},
           true},
          {"33",
           {kPartLink, kSupplierLink, kOrderDateLink},
           {{2, "d_year", Predicate::in_set(std::vector<std::int64_t>{1992, 1997})}},
           1,
           "s_rank",
           kRankRange,
           {{1, "s_nation"}, {2, "d_year"}},
           true}};
    case QueryGroup::G4:
      return {
          {"41",
           {kPartLink, kSupplierLink, kOrderDateLink, kCommitDateLink},
           {{1, "s_region", Predicate::eq(std::int64_t{0})}},
           0,
           "p_size",
           kSizeRange,
           {{2, "d_year"}, {1, "s_nation"}},
           true},
          {"42",
           {kPartLink, kSupplierLink, kOrderDateLink, kCommitDateLink},
           {{1, "s_region", Predicate::eq(std::int64_t{1})},
            {2, "d_month", Predicate::between(std::int64_t{1}, std::int64_t{6})}},
           0,
           "p_size",
           kSizeRange,
           {{2, "d_year"}, {1, "s_nation"}},
           true},
          {"43",
           {kPartLink, kSupplierLink, kOrderDateLink, kCommitDateLink},
           {{1, "s_region", Predicate::eq(std::int64_t{2})},
            {3, "d_year", Predicate::eq(std::int64_t{1995})}},
           0,
           "p_size",
           kSizeRange,
           {{2, "d_year"}, {1, "s_nation"}},
           true}};
  }
  throw GenError("unknown query group");
}

std::vector<double> default_targets(QueryGroup group) {
  switch (group) {
    case QueryGroup::G1: return {0.08, 0.03, 0.01};
    case QueryGroup::G2: return {0.10, 0.04, 0.015};
    case QueryGroup::G3: return {0.09, 0.033, 0.0125};
    case QueryGroup::G4: return {0.05, 0.02, 0.008};
  }
  throw GenError("unknown query group");
}

QuerySpec spec_with_dial(const QueryDef& def, QueryGroup group, std::int64_t dial_value) {
  QuerySpec q;
  q.id = def.id;
  q.group = group;
  q.joins = def.joins;
  q.filters = def.fixed;
  q.filters.push_back({def.dial_target, def.dial_column, Predicate::lt(dial_value)});
  q.measure = "lo_revenue";
  q.group_by = def.group_by;
  q.order_by = def.order_by;
  return q;
}

}  // namespace

double measure_selectivity(const StarSchema& data, const QuerySpec& q) {
  const Table& fact = data.fact();
  if (fact.row_count() == 0) return 0.0;

  // Per-link pass sets over dimension keys; fact-level predicate list.
  std::vector<std::unordered_set<std::int64_t>> pass(q.joins.size());
  for (std::size_t j = 0; j < q.joins.size(); ++j) {
    const Table& dim = data.dim(q.joins[j].dim_name);
    const IntColumn& pk = dim.ints(q.joins[j].dim_pk);
    std::vector<char> keep(pk.size(), 1);
    for (const FilterSpec& f : q.filters) {
      if (f.target != static_cast<int>(j)) continue;
      const index_t col = dim.schema().index_of(f.column);
      if (dim.schema().kind(col) == ColKind::Float) {
        const FloatColumn& v = dim.floats(col);
        for (std::size_t r = 0; r < v.size(); ++r) keep[r] &= f.pred.matches(v[r]) ? 1 : 0;
      } else {
        const IntColumn& v = dim.ints(col);
        for (std::size_t r = 0; r < v.size(); ++r) keep[r] &= f.pred.matches(v[r]) ? 1 : 0;
      }
    }
    pass[j].reserve(pk.size());
    for (std::size_t r = 0; r < pk.size(); ++r)
      if (keep[r]) pass[j].insert(pk[r]);
  }

  std::vector<const IntColumn*> fks;
  fks.reserve(q.joins.size());
  for (const StarLink& link : q.joins) fks.push_back(&fact.ints(link.fact_fk));

  std::int64_t surviving = 0;
  for (index_t i = 0; i < fact.row_count(); ++i) {
    bool ok = true;
    for (const FilterSpec& f : q.filters) {
      if (f.target != -1) continue;
      const index_t col = fact.schema().index_of(f.column);
      ok = fact.schema().kind(col) == ColKind::Float
               ? f.pred.matches(fact.floats(col)[i])
               : f.pred.matches(fact.ints(col)[i]);
      if (!ok) break;
    }
    for (std::size_t j = 0; ok && j < q.joins.size(); ++j) ok = pass[j].count((*fks[j])[i]) != 0;
    surviving += ok ? 1 : 0;
  }
  return static_cast<double>(surviving) / static_cast<double>(fact.row_count());
}

std::vector<QuerySpec> gen_queries(const StarSchema& data, QueryGroup group,
                                   std::span<const double> selectivity_targets) {
  const std::vector<QueryDef> defs = group_defs(group);
  std::vector<double> targets = default_targets(group);
  for (std::size_t i = 0; i < selectivity_targets.size() && i < targets.size(); ++i)
    targets[i] = selectivity_targets[i];

  std::vector<QuerySpec> out;
  out.reserve(defs.size());
  for (std::size_t qi = 0; qi < defs.size(); ++qi) {
    const QueryDef& def = defs[qi];
    const double target = targets[qi];
    if (target <= 0.0 || target >= 1.0) throw GenError("selectivity target must be in (0,1)");

    // Realized selectivity is nondecreasing in the dial constant; binary
    // search the smallest constant reaching the target, then keep whichever
    // neighbor lands closer.
    std::int64_t lo = 0, hi = def.dial_range;
    while (lo < hi) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (measure_selectivity(data, spec_with_dial(def, group, mid)) < target)
        lo = mid + 1;
      else
        hi = mid;
    }
    double best_sel = measure_selectivity(data, spec_with_dial(def, group, lo));
    std::int64_t best = lo;
    if (lo > 0) {
      const double below = measure_selectivity(data, spec_with_dial(def, group, lo - 1));
      if (std::abs(below - target) < std::abs(best_sel - target)) {
        best = lo - 1;
        best_sel = below;
      }
    }
    if (std::abs(best_sel - target) > 0.2 * target)
      throw GenError("query " + std::string(def.id) + ": cannot reach selectivity " +
                     std::to_string(target) + " (closest " + std::to_string(best_sel) + ")");

    QuerySpec q = spec_with_dial(def, group, best);
    q.target_selectivity = target;
    q.realized_selectivity = best_sel;
    out.push_back(std::move(q));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

ml::TreeModel gen_tree(index_t k, index_t p, index_t leaves, std::uint64_t seed) {
  if (leaves < 2) throw GenError("gen_tree: need at least 2 leaves");
  if (k < 1 || p < 1 || p > k) throw GenError("gen_tree: need 1 <= p <= k");

  Rng rng(derive_seed(seed, "tree"));

  // Distinct features while the budget lasts, then uniform draws.
  std::vector<index_t> feature_pool(static_cast<std::size_t>(p));
  std::iota(feature_pool.begin(), feature_pool.end(), index_t{0});
  for (std::size_t i = feature_pool.size(); i > 1; --i)
    std::swap(feature_pool[i - 1], feature_pool[rng.bounded(i)]);
  std::size_t next_feature = 0;
  const auto draw_feature = [&] {
    if (next_feature < feature_pool.size()) return feature_pool[next_feature++];
    return static_cast<index_t>(rng.bounded(static_cast<std::uint64_t>(p)));
  };

  ml::TreeModel t;
  t.nodes.push_back({true, -1, 0.0, -1, -1, 0});
  std::vector<std::pair<index_t, index_t>> leaf_ids{{0, 0}};  // (id, depth)

  index_t leaf_count = 1;
  while (leaf_count < leaves) {
    // Split a random shallowest leaf to keep the tree balanced-ish.
    index_t min_depth = leaf_ids[0].second;
    for (const auto& [id, depth] : leaf_ids) min_depth = std::min(min_depth, depth);
    std::vector<std::size_t> shallow;
    for (std::size_t i = 0; i < leaf_ids.size(); ++i)
      if (leaf_ids[i].second == min_depth) shallow.push_back(i);
    const std::size_t pick = shallow[rng.bounded(shallow.size())];
    const auto [id, depth] = leaf_ids[pick];

    const index_t t_child = static_cast<index_t>(t.nodes.size());
    const index_t f_child = t_child + 1;
    t.nodes.push_back({true, -1, 0.0, -1, -1, 0});
    t.nodes.push_back({true, -1, 0.0, -1, -1, 0});
    t.nodes[id] = {false, draw_feature(), rng.unit(), t_child, f_child, 0};

    leaf_ids[pick] = {t_child, depth + 1};
    leaf_ids.push_back({f_child, depth + 1});
    ++leaf_count;
  }

  std::int64_t label = 0;
  for (ml::TreeNode& node : t.nodes)
    if (node.is_leaf) node.label = label++;
  return t;
}

ml::LinearOperator gen_linear(index_t k, index_t l, std::uint64_t seed) {
  if (k < 1 || l < 1) throw GenError("gen_linear: need positive shape");
  Rng rng(derive_seed(seed, "linear"));
  DenseMat m(k, l);
  for (double& v : m.data()) v = rng.unit() * 2.0 - 1.0;
  return ml::LinearOperator{std::move(m)};
}

// ---------------------------------------------------------------------------
// Feature layout
// ---------------------------------------------------------------------------

FeatureLayout feature_layout(const StarSchema& schema) {
  FeatureLayout layout;
  for (const char* name : {"part", "supplier", "date"}) {
    const Table& dim = schema.dim(name);
    std::vector<std::string> cols;
    for (const auto& [col_name, kind] : dim.schema().columns)
      if (kind == ColKind::Float) cols.push_back(col_name);
    layout.dim_names.emplace_back(name);
    layout.offsets.push_back(layout.total);
    layout.total += static_cast<index_t>(cols.size());
    for (std::size_t f = 0; f < cols.size(); ++f)
      layout.feature_owner.push_back(static_cast<index_t>(layout.dim_names.size()) - 1);
    layout.dim_feature_cols.push_back(std::move(cols));
  }
  return layout;
}

}  // namespace laq::bench
