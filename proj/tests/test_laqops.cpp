#include <doctest.h>

#include <map>
#include <set>

#include "laq/laqops.hpp"
#include "laq/oracle.hpp"
#include "test_support.hpp"

using namespace laq;
using namespace laq::ops;
using testsup::near;
using testsup::nested_loop_join;
using testsup::random_keys;

namespace {

Table key_table(IntColumn keys) {
  return Table(Schema{{"k", ColKind::Key}}, {std::move(keys)});
}

std::set<std::pair<index_t, index_t>> match_pairs(const RowMatch& m) {
  std::set<std::pair<index_t, index_t>> out;
  for (index_t e = 0; e < m.nnz(); ++e) out.emplace(m.mat.row_idx[e], m.mat.col_idx[e]);
  return out;
}

}  // namespace

TEST_CASE("column map reproduces the patient projection example") {
  // Patient(weight, height, age) -> (weight, age): sources 0 and 2 land in
  // target columns 0 and 1.
  const std::vector<std::pair<index_t, index_t>> mapping{{0, 0}, {2, 1}};
  const ColumnMap m = build_column_map(3, mapping);
  CHECK(m.mat.rows == 3);
  CHECK(m.mat.cols == 2);
  CHECK(dense_from_csr(m.mat) == DenseMat(3, 2, {1, 0, 0, 0, 0, 1}));

  const DenseMat patient(1, 3, {70, 180, 30});
  CHECK(project(patient, m) == DenseMat(1, 2, {70, 30}));
}

TEST_CASE("identity column map leaves input unchanged") {
  const std::vector<std::pair<index_t, index_t>> mapping{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
  const ColumnMap m = build_column_map(4, mapping);
  CHECK(m.mat == SparseCsr::identity(4));
  Rng rng(3);
  const DenseMat t = testsup::random_dense(rng, 6, 4);
  CHECK(project(t, m) == t);
}

TEST_CASE("column map rejects duplicate targets and bad sources") {
  const std::vector<std::pair<index_t, index_t>> dup{{0, 0}, {1, 0}};
  CHECK_THROWS_AS(build_column_map(2, dup), MappingError);
  const std::vector<std::pair<index_t, index_t>> oob{{5, 0}};
  CHECK_THROWS_AS(build_column_map(2, oob), IndexError);
}

TEST_CASE("permutation projection restores the original through its inverse") {
  Rng rng(9);
  std::vector<index_t> perm(8);
  std::iota(perm.begin(), perm.end(), index_t{0});
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.bounded(i)]);

  std::vector<std::pair<index_t, index_t>> fwd, inv;
  for (index_t c = 0; c < 8; ++c) {
    fwd.emplace_back(perm[c], c);
    inv.emplace_back(c, perm[c]);
  }
  const DenseMat t = testsup::random_dense(rng, 20, 8);
  CHECK(project(project(t, build_column_map(8, fwd)), build_column_map(8, inv)) == t);
}

TEST_CASE("projection equals a per-column gather oracle") {
  Rng rng(14);
  const DenseMat t = testsup::random_dense(rng, 100, 8);
  std::vector<std::pair<index_t, index_t>> mapping;
  for (index_t c = 0; c < 5; ++c) mapping.emplace_back(rng.range(0, 8), c);
  const DenseMat got = project(t, build_column_map(8, mapping));

  for (const auto& [src, tgt] : mapping)
    for (index_t r = 0; r < t.rows(); ++r) CHECK(got(r, tgt) == t(r, src));
}

TEST_CASE("selection masks") {
  const IntColumn col{1, 5, 3};
  const SelectionMask m = build_selection_mask(col, Predicate::gt(std::int64_t{2}));
  CHECK(m.bits == std::vector<bool>{false, true, true});

  const IntColumn col2{0, 1, 5, 6};
  const SelectionMask m2 =
      build_selection_mask(col2, Predicate::between(std::int64_t{1}, std::int64_t{5}));
  CHECK(m2.bits == std::vector<bool>{false, true, true, false});

  CHECK_THROWS_AS(build_selection_mask(col, Predicate::gt(2.0)), TypeError);
}

TEST_CASE("random predicates match a scalar row loop") {
  Rng rng(21);
  for (int round = 0; round < 50; ++round) {
    IntColumn col;
    for (int i = 0; i < 200; ++i) col.push_back(rng.range(-20, 20));
    const std::int64_t a = rng.range(-20, 20);
    const std::int64_t b = a + rng.range(0, 10);
    Predicate preds[] = {Predicate::lt(a),         Predicate::le(a),
                         Predicate::eq(a),         Predicate::ge(a),
                         Predicate::gt(a),         Predicate::between(a, b),
                         Predicate::in_set(std::vector<std::int64_t>{a, b})};
    for (const Predicate& p : preds) {
      const SelectionMask m = build_selection_mask(col, p);
      for (std::size_t i = 0; i < col.size(); ++i) CHECK(m.bits[i] == p.matches(col[i]));
    }
  }
}

TEST_CASE("apply_mask keeps order and filters both kinds") {
  const Schema schema{{"k", ColKind::Key}, {"x", ColKind::Float}};
  const Table t(schema, {IntColumn{1, 2, 3, 4}, FloatColumn{.1, .2, .3, .4}});

  SelectionMask all;
  all.bits = {true, true, true, true};
  CHECK(apply_mask(t, all) == t);

  SelectionMask none;
  none.bits = {false, false, false, false};
  CHECK(apply_mask(t, none).row_count() == 0);

  SelectionMask some;
  some.bits = {true, false, true, false};
  const Table f = apply_mask(t, some);
  CHECK(f.ints("k") == IntColumn{1, 3});
  CHECK(f.floats("x") == FloatColumn{.1, .3});

  SelectionMask wrong;
  wrong.bits = {true};
  CHECK_THROWS_AS(apply_mask(t, wrong), ShapeError);
}

TEST_CASE("random mask equals a filter loop on matrices") {
  Rng rng(33);
  const DenseMat t = testsup::random_dense(rng, 60, 4);
  SelectionMask m;
  for (index_t i = 0; i < 60; ++i) m.bits.push_back(rng.unit() < 0.4);
  const DenseMat got = apply_mask(t, m);

  index_t r = 0;
  for (index_t i = 0; i < t.rows(); ++i) {
    if (!m.bits[i]) continue;
    for (index_t c = 0; c < t.cols(); ++c) CHECK(got(r, c) == t(i, c));
    ++r;
  }
  CHECK(got.rows() == r);
}

TEST_CASE("key domain union reproduces the worked join example") {
  const IntColumn keys_r{1, 0, 4, 2, 3};
  const IntColumn keys_s{2, 3, 0, 4, 7};
  const KeyDomain d = build_key_domain(keys_r, keys_s);
  CHECK(d.sorted_keys == IntColumn{0, 1, 2, 3, 4, 7});
  CHECK(d.position(7) == 5);
  CHECK_THROWS_AS(d.position(6), DomainError);
}

TEST_CASE("key domain of identical and disjoint arrays") {
  const IntColumn a{5, 5, 2, 2};
  CHECK(build_key_domain(a, a).sorted_keys == IntColumn{2, 5});

  const IntColumn b{1, 3}, c{2, 4};
  CHECK(build_key_domain(b, c).size() == 4);
  CHECK_THROWS_AS(build_key_domain(IntColumn{-1}, c), DomainError);
}

TEST_CASE("update_key_domain matches a rebuild from scratch") {
  const KeyDomain base = build_key_domain(IntColumn{0, 2}, {});
  CHECK(update_key_domain(base, IntColumn{0, 2}).sorted_keys == base.sorted_keys);
  CHECK(update_key_domain(base, IntColumn{1}).sorted_keys == IntColumn{0, 1, 2});

  Rng rng(41);
  for (int round = 0; round < 30; ++round) {
    IntColumn seen = random_keys(rng, 40, 60);
    KeyDomain dom = build_key_domain(seen, {});
    for (int step = 0; step < 5; ++step) {
      const IntColumn fresh = random_keys(rng, 15, 80);
      seen.insert(seen.end(), fresh.begin(), fresh.end());
      dom = update_key_domain(dom, fresh);
      CHECK(dom.sorted_keys == build_key_domain(seen, {}).sorted_keys);
    }
  }
}

TEST_CASE("building a domain equals updating an empty-seeded one") {
  Rng rng(45);
  for (int round = 0; round < 40; ++round) {
    const auto a = random_keys(rng, rng.bounded(60), 50);
    const auto b = random_keys(rng, rng.bounded(60), 50);
    const KeyDomain built = build_key_domain(a, b);
    const KeyDomain updated = update_key_domain(build_key_domain(a, {}), b);
    CHECK(built.sorted_keys == updated.sorted_keys);
  }
}

TEST_CASE("key matrix places one nonzero per row at the domain position") {
  const IntColumn keys{2, 3, 0, 4, 7};
  const KeyDomain d = build_key_domain(IntColumn{1, 0, 4, 2, 3}, keys);
  const SparseCsr m = key_matrix(keys, d, KeyOrientation::RowsByDomain);
  CHECK(m.rows == 5);
  CHECK(m.cols == 6);
  CHECK(m.col_idx == std::vector<index_t>{2, 3, 0, 4, 5});
  for (double v : m.values) CHECK(v == 1.0);

  const SparseCsr mt = key_matrix(keys, d, KeyOrientation::DomainByRows);
  CHECK(transpose(m) == mt);

  CHECK_THROWS_AS(key_matrix(IntColumn{9}, d, KeyOrientation::RowsByDomain), DomainError);
}

TEST_CASE("key matrix trivial and valued forms") {
  const KeyDomain d = build_key_domain(IntColumn{6}, {});
  const SparseCsr one = key_matrix(IntColumn{6}, d, KeyOrientation::RowsByDomain);
  CHECK(one.rows == 1);
  CHECK(one.cols == 1);
  CHECK(one.values == std::vector<double>{1.0});

  const KeyDomain d2 = build_key_domain(IntColumn{1, 5}, {});
  const FloatColumn vals{10, 20};
  const SparseCsr valued = key_matrix(IntColumn{5, 1}, d2, KeyOrientation::RowsByDomain, vals);
  CHECK(dense_from_csr(valued) == DenseMat(2, 2, {0, 10, 20, 0}));
}

TEST_CASE("mm_join simple matches") {
  const IntColumn r{0, 1}, s{1, 0};
  const RowMatch m = mm_join(r, s);
  CHECK(match_pairs(m) == std::set<std::pair<index_t, index_t>>{{0, 1}, {1, 0}});

  const RowMatch empty = mm_join(IntColumn{1, 2}, IntColumn{3, 4});
  CHECK(empty.nnz() == 0);
  CHECK(empty.mat.rows == 2);
  CHECK(empty.mat.cols == 2);
}

TEST_CASE("mm_join equals the nested-loop oracle with duplicates") {
  Rng rng(51);
  for (int round = 0; round < 40; ++round) {
    const auto r = random_keys(rng, 1 + rng.bounded(120), 30);
    const auto s = random_keys(rng, 1 + rng.bounded(120), 30);
    const RowMatch m = mm_join(r, s);
    check_canonical(m.mat);
    for (double v : m.mat.values) CHECK(v == 1.0);

    const auto want = nested_loop_join(r, s);
    CHECK(match_pairs(m) ==
          std::set<std::pair<index_t, index_t>>(want.begin(), want.end()));
  }
}

TEST_CASE("mm_join with a cached superset domain is identical") {
  Rng rng(57);
  const auto r = random_keys(rng, 80, 25);
  const auto s = random_keys(rng, 90, 25);
  const KeyDomain cached = update_key_domain(build_key_domain(r, s), random_keys(rng, 40, 50));
  CHECK(mm_join(r, s).mat == mm_join(r, s, cached).mat);
}

TEST_CASE("multiway star join equals sequential hash joins on random stars") {
  Rng rng(61);
  for (int round = 0; round < 15; ++round) {
    const index_t fact_rows = 200 + static_cast<index_t>(rng.bounded(300));
    std::vector<Table> dims;
    std::vector<IntColumn> fks;
    for (int d = 0; d < 3; ++d) {
      const index_t dim_rows = 10 + static_cast<index_t>(rng.bounded(40));
      IntColumn pk(static_cast<std::size_t>(dim_rows));
      std::iota(pk.begin(), pk.end(), std::int64_t{0});
      dims.push_back(key_table(std::move(pk)));
      // Sample beyond the key space so some fact rows dangle.
      fks.push_back(random_keys(rng, fact_rows, dim_rows + 8));
    }
    const Schema fact_schema{{"f0", ColKind::Key}, {"f1", ColKind::Key}, {"f2", ColKind::Key}};
    const Table fact(fact_schema, {fks[0], fks[1], fks[2]});

    const std::vector<DimJoinSpec> specs{
        {&dims[0], "f0", "k"}, {&dims[1], "f1", "k"}, {&dims[2], "f2", "k"}};
    std::vector<index_t> survivors;
    const std::vector<RowMatch> got = multiway_star_join(fact, specs, &survivors);

    std::vector<oracle::DimRef> refs{
        {&dims[0], "f0", "k"}, {&dims[1], "f1", "k"}, {&dims[2], "f2", "k"}};
    const oracle::StarMatch want = oracle::star_join(fact, refs);

    REQUIRE(static_cast<index_t>(survivors.size()) == want.row_count());
    CHECK(survivors == want.fact_rows);
    for (int d = 0; d < 3; ++d) {
      REQUIRE(got[d].nnz() == want.row_count());
      // Exactly one nonzero per target row, in target-row order.
      for (index_t m = 0; m < got[d].nnz(); ++m) {
        CHECK(got[d].mat.row_idx[m] == m);
        CHECK(got[d].mat.col_idx[m] == want.dim_rows[d][m]);
      }
    }
  }
}

TEST_CASE("multiway star join trivial cases") {
  const Table dim = key_table(IntColumn{0, 1, 2});
  const Table fact(Schema{{"f", ColKind::Key}}, {IntColumn{2, 0, 1, 2}});
  const std::vector<DimJoinSpec> specs{{&dim, "f", "k"}};

  std::vector<index_t> survivors;
  const auto full = multiway_star_join(fact, specs, &survivors);
  CHECK(full[0].nnz() == 4);
  CHECK(survivors == std::vector<index_t>{0, 1, 2, 3});

  const Table empty_dim = key_table(IntColumn{});
  const std::vector<DimJoinSpec> specs2{{&dim, "f", "k"}, {&empty_dim, "f", "k"}};
  const auto none = multiway_star_join(fact, specs2);
  CHECK(none[0].nnz() == 0);
  CHECK(none[1].nnz() == 0);

  const Table dup_dim = key_table(IntColumn{0, 0});
  const std::vector<DimJoinSpec> specs3{{&dup_dim, "f", "k"}};
  CHECK_THROWS_AS(multiway_star_join(fact, specs3), DuplicateKeyError);
}

TEST_CASE("row mapping matrices select source rows") {
  SparseCoo coo;
  coo.rows = 2;
  coo.cols = 2;
  coo.row_idx = {0, 1};
  coo.col_idx = {1, 0};
  coo.values = {1, 1};
  const auto [i_r, i_s] = row_mapping_matrices(RowMatch{coo});
  CHECK(dense_from_csr(i_r) == DenseMat(2, 2, {1, 0, 0, 1}));
  CHECK(dense_from_csr(i_s) == DenseMat(2, 2, {0, 1, 1, 0}));

  RowMatch empty;
  empty.mat.rows = 3;
  empty.mat.cols = 4;
  const auto [e_r, e_s] = row_mapping_matrices(empty);
  CHECK(e_r.rows == 0);
  CHECK(e_r.cols == 3);
  CHECK(e_s.rows == 0);
  CHECK(e_s.cols == 4);
}

TEST_CASE("two-way join materialization equals the nested-loop construction") {
  Rng rng(71);
  const auto keys_r = random_keys(rng, 40, 12);
  const auto keys_s = random_keys(rng, 35, 12);
  const DenseMat mat_r = testsup::random_dense(rng, 40, 3);
  const DenseMat mat_s = testsup::random_dense(rng, 35, 2);

  const RowMatch join = mm_join(keys_r, keys_s);
  const auto [i_r, i_s] = row_mapping_matrices(join);

  // Place R's columns at 0..2 and S's at 3..4.
  const std::vector<std::pair<index_t, index_t>> pr{{0, 0}, {1, 1}, {2, 2}};
  const std::vector<std::pair<index_t, index_t>> ps{{0, 3}, {1, 4}};
  const std::vector<SparseCsr> maps{i_r, i_s};
  const std::vector<DenseMat> mats{mat_r, mat_s};
  const std::vector<ColumnMap> cmaps{build_placement_map(3, 5, pr), build_placement_map(2, 5, ps)};
  const DenseMat got = materialize(maps, mats, cmaps);

  const auto pairs = nested_loop_join(keys_r, keys_s);
  REQUIRE(got.rows() == static_cast<index_t>(pairs.size()));
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    for (index_t c = 0; c < 3; ++c) CHECK(got(m, c) == mat_r(pairs[m].first, c));
    for (index_t c = 0; c < 2; ++c) CHECK(got(m, 3 + c) == mat_s(pairs[m].second, c));
  }
}

TEST_CASE("materialize trivial and error cases") {
  Rng rng(77);
  const DenseMat src = testsup::random_dense(rng, 6, 3);
  const std::vector<std::pair<index_t, index_t>> id3{{0, 0}, {1, 1}, {2, 2}};

  // Identity row map: plain row gather.
  const std::vector<SparseCsr> maps{SparseCsr::identity(6)};
  const std::vector<DenseMat> mats{src};
  const std::vector<ColumnMap> cmaps{build_column_map(3, id3)};
  CHECK(materialize(maps, mats, cmaps) == src);

  // Empty join: 0 x k result.
  SparseCsr empty;
  empty.rows = 0;
  empty.cols = 6;
  const std::vector<SparseCsr> emaps{empty};
  const DenseMat got = materialize(emaps, mats, cmaps);
  CHECK(got.rows() == 0);
  CHECK(got.cols() == 3);

  // Overlapping targets across two sources.
  const std::vector<SparseCsr> two{SparseCsr::identity(6), SparseCsr::identity(6)};
  const std::vector<DenseMat> mats2{src, src};
  const std::vector<ColumnMap> overlap{build_placement_map(3, 3, id3),
                                       build_placement_map(3, 3, id3)};
  CHECK_THROWS_AS(materialize(two, mats2, overlap), MappingError);
}

TEST_CASE("group-by-sum reproduces the worked membership example") {
  // S keys {2}->group 0, {3,0}->group 1, {4,7}->group 2; R values are powers
  // of ten so each group sum spells out its members.
  const IntColumn keys_r{1, 0, 4, 2, 3};
  const FloatColumn vals_r{1, 10, 100, 1000, 10000};
  const IntColumn keys_s{2, 3, 0, 4, 7};
  const IntColumn group_s{0, 1, 1, 2, 2};

  const auto got = groupby_sum_single(keys_r, vals_r, keys_s, group_s);
  REQUIRE(got.size() == 3);
  CHECK(got[0] == GroupSum{0, 1000.0});
  CHECK(got[1] == GroupSum{1, 10010.0});
  CHECK(got[2] == GroupSum{2, 100.0});
}

TEST_CASE("group-by-sum with one full group totals the values") {
  const IntColumn keys_r{5, 6, 5};
  const FloatColumn vals_r{1.5, 2.5, 3.0};
  const IntColumn keys_s{5, 6};
  const IntColumn group_s{9, 9};
  const auto got = groupby_sum_single(keys_r, vals_r, keys_s, group_s);
  REQUIRE(got.size() == 1);
  CHECK(got[0].group == 9);
  CHECK(got[0].sum == 7.0);
}

TEST_CASE("group-by-sum equals hash aggregation over the join") {
  Rng rng(81);
  for (int round = 0; round < 25; ++round) {
    const auto keys_r = random_keys(rng, 150, 20);
    const auto keys_s = random_keys(rng, 60, 20);
    IntColumn group_s;
    FloatColumn vals_r;
    for (std::size_t i = 0; i < keys_s.size(); ++i) group_s.push_back(rng.range(0, 5));
    for (std::size_t i = 0; i < keys_r.size(); ++i)
      vals_r.push_back(static_cast<double>(rng.range(1, 100)));

    const auto got = groupby_sum_single(keys_r, vals_r, keys_s, group_s);

    // Nested-loop join then hash aggregation, plus zero-filled groups.
    std::map<std::int64_t, double> want;
    for (std::int64_t g : group_s) want[g] = 0.0;
    for (std::size_t i = 0; i < keys_r.size(); ++i)
      for (std::size_t j = 0; j < keys_s.size(); ++j)
        if (keys_r[i] == keys_s[j]) want[group_s[j]] += vals_r[i];

    REQUIRE(got.size() == want.size());
    std::size_t idx = 0;
    for (const auto& [g, sum] : want) {
      CHECK(got[idx].group == g);
      CHECK(got[idx].sum == sum);  // integer values: exact
      ++idx;
    }
  }
}

TEST_CASE("multi-column group-by agrees with the single-column operator") {
  Rng rng(85);
  const auto keys_r = random_keys(rng, 120, 15);
  const auto keys_s = random_keys(rng, 15, 40);  // near-unique keys
  IntColumn group_s;
  FloatColumn vals_r;
  for (std::size_t i = 0; i < keys_s.size(); ++i) group_s.push_back(rng.range(0, 4));
  for (std::size_t i = 0; i < keys_r.size(); ++i)
    vals_r.push_back(static_cast<double>(rng.range(1, 50)));

  // Build the joined rows by hand, then group them one way and the other.
  IntColumn joined_groups;
  FloatColumn joined_vals;
  for (std::size_t i = 0; i < keys_r.size(); ++i)
    for (std::size_t j = 0; j < keys_s.size(); ++j)
      if (keys_r[i] == keys_s[j]) {
        joined_groups.push_back(group_s[j]);
        joined_vals.push_back(vals_r[i]);
      }

  const std::vector<IntColumn> gcols{joined_groups};
  const auto multi = groupby_sum_multi(gcols, joined_vals);
  const auto single = groupby_sum_single(keys_r, vals_r, keys_s, group_s);

  // The single-column form also reports unmatched groups as zero; values are
  // positive here, so zero-sum entries are exactly those.
  std::vector<GroupSum> nonzero;
  for (const GroupSum& g : single)
    if (g.sum != 0.0) nonzero.push_back(g);
  REQUIRE(multi.size() == nonzero.size());
  for (std::size_t i = 0; i < multi.size(); ++i) {
    CHECK(multi[i].group[0] == nonzero[i].group);
    CHECK(multi[i].sum == nonzero[i].sum);
  }
}

TEST_CASE("multi-column group-by handles identical tuples and random data") {
  const std::vector<IntColumn> same{{7, 7, 7}, {3, 3, 3}};
  const FloatColumn vals{1, 2, 3};
  const auto one = groupby_sum_multi(same, vals);
  REQUIRE(one.size() == 1);
  CHECK(one[0].group == std::vector<std::int64_t>{7, 3});
  CHECK(one[0].sum == 6.0);

  Rng rng(91);
  for (int round = 0; round < 20; ++round) {
    IntColumn a, b;
    FloatColumn v;
    for (int i = 0; i < 300; ++i) {
      a.push_back(rng.range(0, 6));
      b.push_back(rng.range(0, 4));
      v.push_back(static_cast<double>(rng.range(-50, 50)));
    }
    const std::vector<IntColumn> gcols{a, b};
    const auto got = groupby_sum_multi(gcols, v);

    std::map<std::pair<std::int64_t, std::int64_t>, double> want;
    for (std::size_t i = 0; i < v.size(); ++i) want[{a[i], b[i]}] += v[i];
    REQUIRE(got.size() == want.size());
    std::size_t idx = 0;
    for (const auto& [key, sum] : want) {
      CHECK(got[idx].group == std::vector<std::int64_t>{key.first, key.second});
      CHECK(got[idx].sum == sum);
      ++idx;
    }
  }
}

TEST_CASE("sort_rows is a stable lexicographic sort") {
  const DenseMat sorted(3, 2, {1, 9, 2, 8, 3, 7});
  const std::vector<index_t> keys{0};
  const std::vector<SortDir> asc{SortDir::Asc};
  CHECK(sort_rows(sorted, keys, asc) == sorted);

  const DenseMat rev(3, 2, {3, 7, 2, 8, 1, 9});
  CHECK(sort_rows(rev, keys, asc) == sorted);
  const std::vector<SortDir> desc{SortDir::Desc};
  CHECK(sort_rows(sorted, keys, desc) == rev);

  CHECK_THROWS_AS(sort_rows(sorted, std::vector<index_t>{5}, asc), IndexError);

  // Ties keep their original relative order; the second column tracks it.
  Rng rng(95);
  DenseMat t(200, 2);
  for (index_t i = 0; i < 200; ++i) {
    t(i, 0) = static_cast<double>(rng.range(0, 5));
    t(i, 1) = static_cast<double>(i);
  }
  const DenseMat s = sort_rows(t, keys, asc);
  for (index_t i = 1; i < s.rows(); ++i) {
    CHECK(s(i - 1, 0) <= s(i, 0));
    if (s(i - 1, 0) == s(i, 0)) CHECK(s(i - 1, 1) < s(i, 1));
  }
}
