#include <doctest.h>

#include <unordered_set>

#include "laq/benchgen.hpp"
#include "laq/oracle.hpp"
#include "test_support.hpp"

using namespace laq;
using namespace laq::bench;

namespace {

GenConfig cfg_s2(std::int64_t sf, std::uint64_t seed = 42, index_t features = 0) {
  GenConfig cfg;
  cfg.sf = sf;
  cfg.setting = Setting::S2;
  cfg.seed = seed;
  cfg.feature_width = features;
  return cfg;
}

// Independent survivor count: scalar predicate loops and linear pk scans,
// sharing no machinery with measure_selectivity.
double count_selectivity(const StarSchema& data, const QuerySpec& q) {
  const Table& fact = data.fact();
  std::int64_t surviving = 0;
  for (index_t i = 0; i < fact.row_count(); ++i) {
    bool ok = true;
    for (const FilterSpec& f : q.filters) {
      if (f.target != -1) continue;
      const index_t c = fact.schema().index_of(f.column);
      ok = fact.schema().kind(c) == ColKind::Float ? f.pred.matches(fact.floats(c)[i])
                                                   : f.pred.matches(fact.ints(c)[i]);
      if (!ok) break;
    }
    for (std::size_t j = 0; ok && j < q.joins.size(); ++j) {
      const Table& dim = data.dim(q.joins[j].dim_name);
      const IntColumn& pk = dim.ints(q.joins[j].dim_pk);
      const std::int64_t fk = fact.ints(q.joins[j].fact_fk)[i];
      bool matched = false;
      for (std::size_t r = 0; r < pk.size() && !matched; ++r) {
        if (pk[r] != fk) continue;
        matched = true;
        for (const FilterSpec& f : q.filters) {
          if (f.target != static_cast<int>(j)) continue;
          const index_t c = dim.schema().index_of(f.column);
          const bool pass = dim.schema().kind(c) == ColKind::Float
                                ? f.pred.matches(dim.floats(c)[r])
                                : f.pred.matches(dim.ints(c)[r]);
          if (!pass) matched = false;
        }
      }
      ok = matched;
    }
    surviving += ok ? 1 : 0;
  }
  return static_cast<double>(surviving) / static_cast<double>(fact.row_count());
}

}  // namespace

TEST_CASE("cardinalities follow the SSB-derived profiles") {
  GenConfig s1;
  s1.setting = Setting::S1;
  s1.sf = 1;
  const Cardinalities c1 = planned_cardinalities(s1);
  CHECK(c1.lineorder == 600000);
  CHECK(c1.part == 20000);
  CHECK(c1.supplier == 2000);
  CHECK(c1.date == 2555);

  const Cardinalities c2 = planned_cardinalities(cfg_s2(2));
  CHECK(c2.lineorder == 6000);
  CHECK(c2.part == 4000);  // 2000 * floor(1 + log2 2)
  CHECK(c2.supplier == 4000);
  CHECK(c2.date == 2555);

  GenConfig ssb;
  ssb.setting = Setting::Ssb;
  ssb.sf = 1;
  const Cardinalities c3 = planned_cardinalities(ssb);
  CHECK(c3.lineorder == 6000000);
  CHECK(c3.part == 200000);
  CHECK(c3.customer == 30000);
  CHECK(c3.date == 2555);

  s1.sf = 16;
  CHECK(planned_cardinalities(s1).part == 100000);  // floor(1 + log2 16) = 5
  CHECK_THROWS_AS(planned_cardinalities(cfg_s2(0)), GenError);
}

TEST_CASE("setting 1 at sf=1 generates the stated row counts") {
  GenConfig cfg;
  cfg.setting = Setting::S1;
  cfg.sf = 1;
  const StarSchema data = gen_star(cfg);
  CHECK(data.fact().row_count() == 600000);
  CHECK(data.dim("part").row_count() == 20000);
  CHECK(data.dim("supplier").row_count() == 2000);
  CHECK(data.dim("date").row_count() == 2555);
}

TEST_CASE("generation is deterministic per seed") {
  const StarSchema a = gen_star(cfg_s2(1, 7, 6));
  const StarSchema b = gen_star(cfg_s2(1, 7, 6));
  CHECK(a.fact() == b.fact());
  for (std::size_t d = 0; d < a.dims().size(); ++d) CHECK(a.dims()[d] == b.dims()[d]);

  const StarSchema c = gen_star(cfg_s2(1, 8, 6));
  CHECK(a.fact() != c.fact());
}

TEST_CASE("dim keys are dense and fact keys all match by default") {
  const StarSchema data = gen_star(cfg_s2(1));
  for (const auto& [name, dim] : data.dims()) {
    const IntColumn& pk = dim.ints(index_t{0});
    for (std::size_t r = 0; r < pk.size(); ++r) CHECK(pk[r] == static_cast<std::int64_t>(r));
  }
  for (const StarLink& link : data.links()) {
    const IntColumn& fk = data.fact().ints(link.fact_fk);
    const index_t rows = data.dim(link.dim_name).row_count();
    for (std::int64_t k : fk) CHECK((k >= 0 && k < rows));
  }
}

TEST_CASE("dangling fraction produces unmatched keys") {
  GenConfig cfg = cfg_s2(1);
  cfg.dangling_fraction = 0.3;
  const StarSchema data = gen_star(cfg);
  const IntColumn& fk = data.fact().ints("lo_part");
  const index_t rows = data.dim("part").row_count();
  index_t dangling = 0;
  for (std::int64_t k : fk) {
    CHECK(k >= 0);
    dangling += k >= rows ? 1 : 0;
  }
  const double frac = static_cast<double>(dangling) / static_cast<double>(fk.size());
  CHECK(frac > 0.2);
  CHECK(frac < 0.4);
}

TEST_CASE("capacity guard trips before large allocations") {
  GenConfig cfg = cfg_s2(1);
  cfg.max_bytes = 1024;
  CHECK_THROWS_AS(gen_star(cfg), CapacityError);

  GenConfig ssb;
  ssb.setting = Setting::Ssb;
  ssb.sf = 4;
  ssb.max_bytes = 1 << 20;
  CHECK_THROWS_AS(gen_ssb_scale(ssb), CapacityError);
}

TEST_CASE("full-size star generation includes the customer dimension") {
  GenConfig cfg;
  cfg.setting = Setting::Ssb;
  cfg.sf = 1;
  cfg.seed = 3;
  const StarSchema data = gen_ssb_scale(cfg);
  CHECK(data.fact().row_count() == 6000000);
  CHECK(data.dim("part").row_count() == 200000);
  CHECK(data.dim("supplier").row_count() == 2000);
  CHECK(data.dim("customer").row_count() == 30000);
  CHECK(data.dim("date").row_count() == 2555);
  bool customer_link = false;
  for (const StarLink& link : data.links())
    customer_link |= link.fact_fk == "lo_customer" && link.dim_name == "customer";
  CHECK(customer_link);
}

TEST_CASE("query groups match the SSB group shapes") {
  const StarSchema data = gen_star(cfg_s2(1, 11));
  const struct {
    QueryGroup group;
    std::size_t joins;
    bool grouped;
    bool sorted;
  } shapes[] = {{QueryGroup::G1, 1, false, false},
                {QueryGroup::G2, 3, true, true},
                {QueryGroup::G3, 3, true, true},
                {QueryGroup::G4, 4, true, true}};
  for (const auto& s : shapes) {
    const std::vector<QuerySpec> qs = gen_queries(data, s.group);
    REQUIRE(qs.size() == 3);
    for (const QuerySpec& q : qs) {
      CHECK(q.joins.size() == s.joins);
      CHECK(q.group_by.empty() == !s.grouped);
      CHECK(q.order_by == s.sorted);
      CHECK(!q.measure.empty());
    }
  }
}

TEST_CASE("realized selectivity lands within 20% of target") {
  const StarSchema data = gen_star(cfg_s2(2, 13));
  for (const QueryGroup g : {QueryGroup::G1, QueryGroup::G2, QueryGroup::G3, QueryGroup::G4}) {
    for (const QuerySpec& q : gen_queries(data, g)) {
      CHECK(std::abs(q.realized_selectivity - q.target_selectivity) <=
            0.2 * q.target_selectivity);
      // The reported figure matches an independent count.
      CHECK(q.realized_selectivity == doctest::Approx(count_selectivity(data, q)).epsilon(1e-12));
    }
  }
}

TEST_CASE("custom selectivity targets are honored") {
  const StarSchema data = gen_star(cfg_s2(2, 17));
  const std::vector<double> targets{0.05, 0.02, 0.01};
  const std::vector<QuerySpec> qs = gen_queries(data, QueryGroup::G2, targets);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    CHECK(qs[i].target_selectivity == targets[i]);
    CHECK(std::abs(qs[i].realized_selectivity - targets[i]) <= 0.2 * targets[i]);
  }
  const std::vector<double> impossible{0.9999, 0.9999, 0.9999};
  CHECK_THROWS_AS(gen_queries(data, QueryGroup::G1, impossible), GenError);
}

TEST_CASE("generated trees have the requested leaves and bounded depth") {
  for (const index_t leaves : {2, 3, 17, 256}) {
    const ml::TreeModel t = gen_tree(300, 300, leaves, 99);
    ml::validate_tree(t);
    CHECK(t.leaf_count() == leaves);
    CHECK(t.internal_count() == leaves - 1);

    // Balanced-ish growth keeps depth at ceil(log2 leaves).
    index_t max_depth = 0;
    std::vector<std::pair<index_t, index_t>> stack{{0, 0}};
    while (!stack.empty()) {
      const auto [id, depth] = stack.back();
      stack.pop_back();
      max_depth = std::max(max_depth, depth);
      if (!t.nodes[id].is_leaf) {
        stack.push_back({t.nodes[id].true_child, depth + 1});
        stack.push_back({t.nodes[id].false_child, depth + 1});
      }
    }
    index_t bound = 0;
    while ((index_t{1} << bound) < leaves) ++bound;
    CHECK(max_depth <= bound);
  }

  CHECK_THROWS_AS(gen_tree(8, 8, 1, 1), GenError);
  CHECK_THROWS_AS(gen_tree(8, 9, 4, 1), GenError);

  // Two leaves: a single internal node.
  const ml::TreeModel tiny = gen_tree(16, 2, 2, 5);
  CHECK(tiny.internal_count() == 1);

  // Determinism.
  const ml::TreeModel t1 = gen_tree(32, 16, 20, 123);
  const ml::TreeModel t2 = gen_tree(32, 16, 20, 123);
  REQUIRE(t1.nodes.size() == t2.nodes.size());
  for (std::size_t i = 0; i < t1.nodes.size(); ++i) {
    CHECK(t1.nodes[i].feature == t2.nodes[i].feature);
    CHECK(t1.nodes[i].threshold == t2.nodes[i].threshold);
  }
}

TEST_CASE("tree features stay inside the requested pool") {
  const ml::TreeModel t = gen_tree(64, 5, 40, 31);
  std::unordered_set<index_t> used;
  for (const ml::TreeNode& n : t.nodes)
    if (!n.is_leaf) {
      CHECK(n.feature >= 0);
      CHECK(n.feature < 5);
      used.insert(n.feature);
    }
  CHECK(used.size() == 5);  // 39 nodes over 5 features must reuse all of them
}

TEST_CASE("gen_linear is deterministic with the requested shape") {
  const ml::LinearOperator a = gen_linear(16, 2, 7);
  const ml::LinearOperator b = gen_linear(16, 2, 7);
  CHECK(a.mat == b.mat);
  CHECK(a.mat.rows() == 16);
  CHECK(a.mat.cols() == 2);
  for (double v : a.mat.data()) CHECK((v >= -1.0 && v < 1.0));
  CHECK_THROWS_AS(gen_linear(0, 2, 7), GenError);
}

TEST_CASE("feature layout concatenates part, supplier and date slices") {
  const StarSchema data = gen_star(cfg_s2(1, 21, 8));
  const FeatureLayout layout = feature_layout(data);
  CHECK(layout.total == 8);
  CHECK(layout.dim_names == std::vector<std::string>{"part", "supplier", "date"});
  // 8 = 3 + 3 + 2 across the three dims.
  CHECK(layout.dim_feature_cols[0].size() == 3);
  CHECK(layout.dim_feature_cols[1].size() == 3);
  CHECK(layout.dim_feature_cols[2].size() == 2);
  CHECK(layout.offsets == std::vector<index_t>{0, 3, 6});
  for (index_t f = 0; f < layout.total; ++f) {
    const index_t d = layout.feature_owner[f];
    CHECK(f >= layout.offsets[d]);
    CHECK(f < layout.offsets[d] + static_cast<index_t>(layout.dim_feature_cols[d].size()));
  }
}
