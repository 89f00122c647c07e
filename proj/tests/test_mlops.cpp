#include <doctest.h>

#include <sstream>

#include "laq/benchgen.hpp"
#include "laq/mlops.hpp"
#include "laq/oracle.hpp"
#include "test_support.hpp"

using namespace laq;
using namespace laq::ml;

namespace {

TreeModel single_node_tree(double threshold) {
  TreeModel t;
  t.nodes.push_back({false, 0, threshold, 1, 2, 0});
  t.nodes.push_back({true, -1, 0, -1, -1, 10});
  t.nodes.push_back({true, -1, 0, -1, -1, 20});
  return t;
}

DenseMat random_inputs(Rng& rng, index_t rows, index_t cols) {
  DenseMat m(rows, cols);
  for (double& v : m.data()) v = rng.unit();
  return m;
}

}  // namespace

TEST_CASE("smallest tree compiles to the expected tensors") {
  const TreeLA m = compile_tree(single_node_tree(0.5), 1);
  CHECK(m.node_count() == 1);
  CHECK(m.leaf_count() == 2);
  CHECK(dense_from_csr(m.feature_map) == DenseMat(1, 1, {1}));
  CHECK(m.thresholds == std::vector<double>{0.5});
  CHECK(m.paths == DenseMat(1, 2, {1, -1}));
  CHECK(m.path_score == std::vector<double>{1, 0});
  CHECK(m.labels == std::vector<std::int64_t>{10, 20});
}

TEST_CASE("a leaf reached through two false edges scores zero") {
  // F1 false -> F2, F2 false -> the leaf: its path column holds two -1
  // entries and the matching score is 0.
  TreeModel t;
  t.nodes.push_back({false, 0, 0.5, 1, 2, 0});   // F1
  t.nodes.push_back({true, -1, 0, -1, -1, 1});   // L1 (true side)
  t.nodes.push_back({false, 1, 0.25, 3, 4, 0});  // F2
  t.nodes.push_back({true, -1, 0, -1, -1, 3});   // L3
  t.nodes.push_back({true, -1, 0, -1, -1, 2});   // L2 via false, false
  const TreeLA m = compile_tree(t, 2);

  // Pre-order leaves: L1, L3, L2 -> L2 is the last column.
  const index_t l2 = 2;
  CHECK(m.labels[l2] == 2);
  CHECK(m.path_score[l2] == 0.0);
  int minus = 0;
  for (index_t node = 0; node < m.node_count(); ++node) {
    CHECK(m.paths(node, l2) <= 0.0);
    minus += m.paths(node, l2) == -1.0 ? 1 : 0;
  }
  CHECK(minus == 2);

  // Row on the false side of both splits lands in L2.
  const DenseMat row(1, 2, {0.5, 0.25});  // ties go false
  CHECK(predict_tree(row, m) == std::vector<std::int64_t>{2});
}

TEST_CASE("feature map is orthogonal when node features are distinct") {
  Rng rng(7);
  for (int round = 0; round < 10; ++round) {
    const index_t leaves = 2 + static_cast<index_t>(rng.bounded(30));
    const index_t k = leaves + 5;  // enough features for distinct draws
    const TreeModel t = bench::gen_tree(k, k, leaves, rng.next_u64());
    const TreeLA m = compile_tree(t, k);
    const SparseCsr gram = spmm(transpose(m.feature_map), m.feature_map);
    CHECK(gram == SparseCsr::identity(m.node_count()));
  }
}

TEST_CASE("feature map columns stay one-hot even with repeated features") {
  const TreeModel t = bench::gen_tree(3, 3, 32, 99);  // 31 nodes over 3 features
  const TreeLA m = compile_tree(t, 3);
  const DenseMat f = dense_from_csr(m.feature_map);
  for (index_t j = 0; j < m.node_count(); ++j) {
    int ones = 0;
    for (index_t r = 0; r < 3; ++r) ones += f(r, j) == 1.0 ? 1 : 0;
    CHECK(ones == 1);
  }
}

TEST_CASE("predict_linear basics") {
  Rng rng(13);
  const DenseMat t = random_inputs(rng, 12, 6);
  LinearOperator identity{dense_from_csr(SparseCsr::identity(6))};
  CHECK(predict_linear(t, identity) == t);

  const DenseMat empty(0, 6);
  CHECK(predict_linear(empty, identity).rows() == 0);

  const LinearOperator op{testsup::random_dense(rng, 6, 3)};
  CHECK(predict_linear(t, op) == testsup::matmul_ref(t, op.mat));
}

TEST_CASE("single split prediction and threshold ties") {
  const TreeLA m = compile_tree(single_node_tree(0.5), 1);
  CHECK(predict_tree(DenseMat(1, 1, {0.7}), m) == std::vector<std::int64_t>{10});
  CHECK(predict_tree(DenseMat(1, 1, {0.2}), m) == std::vector<std::int64_t>{20});
  // Exactly at the threshold: strict >, so the false branch wins.
  CHECK(predict_tree(DenseMat(1, 1, {0.5}), m) == std::vector<std::int64_t>{20});
}

TEST_CASE("tree prediction equals traversal on random trees and inputs") {
  Rng rng(17);
  for (int round = 0; round < 30; ++round) {
    const index_t k = 2 + static_cast<index_t>(rng.bounded(40));
    const index_t p = 1 + static_cast<index_t>(rng.bounded(k));
    const index_t leaves = 2 + static_cast<index_t>(rng.bounded(120));
    const TreeModel t = bench::gen_tree(k, p, leaves, rng.next_u64());
    const TreeLA m = compile_tree(t, k);

    DenseMat inputs = random_inputs(rng, 64, k);
    // A few rows sit exactly on node thresholds to exercise ties.
    for (index_t i = 0; i < 8; ++i) {
      const auto node = static_cast<index_t>(rng.bounded(m.node_count()));
      index_t feat = 0;
      for (index_t f = 0; f < k; ++f)
        for (index_t jj = m.feature_map.row_ptr[f]; jj < m.feature_map.row_ptr[f + 1]; ++jj)
          if (m.feature_map.col_idx[jj] == node) feat = f;
      inputs(i, feat) = m.thresholds[node];
    }

    const std::vector<std::int64_t> got = predict_tree(inputs, m);
    for (index_t i = 0; i < inputs.rows(); ++i) {
      const std::span<const double> row{inputs.row(i), static_cast<std::size_t>(k)};
      CHECK(got[i] == oracle::traverse_tree(t, row));
    }
  }
}

TEST_CASE("corrupted path scores raise ModelError") {
  const TreeLA m = compile_tree(single_node_tree(0.5), 1);
  TreeLA broken = m;
  broken.path_score = {5, 7};  // no leaf can match
  CHECK_THROWS_AS(predict_tree(DenseMat(1, 1, {0.9}), broken), ModelError);
  TreeLA doubled = m;
  doubled.path_score = {1, -1};  // both columns match a true-side row
  CHECK_THROWS_AS(predict_tree(DenseMat(1, 1, {0.9}), doubled), ModelError);
}

TEST_CASE("tree text format round-trips") {
  Rng rng(23);
  const TreeModel t = bench::gen_tree(10, 8, 17, 4242);
  std::stringstream buf;
  save_tree(t, buf);
  const TreeModel back = parse_tree(buf);
  REQUIRE(back.nodes.size() == t.nodes.size());
  const DenseMat inputs = random_inputs(rng, 50, 10);
  for (index_t i = 0; i < inputs.rows(); ++i) {
    const std::span<const double> row{inputs.row(i), 10};
    CHECK(oracle::traverse_tree(back, row) == oracle::traverse_tree(t, row));
  }
}

TEST_CASE("malformed trees are rejected") {
  std::stringstream missing("N 0 0 0.5 1 2\nL 1 7\n");
  CHECK_THROWS_AS(parse_tree(missing), TreeError);

  std::stringstream twice("L 0 1\nL 0 2\n");
  CHECK_THROWS_AS(parse_tree(twice), TreeError);

  std::stringstream garbage("N 0 zero 0.5 1 2\nL 1 7\nL 2 8\n");
  CHECK_THROWS_AS(parse_tree(garbage), TreeError);

  TreeModel cycle;
  cycle.nodes.push_back({false, 0, 0.5, 0, 1, 0});  // true child loops to root
  cycle.nodes.push_back({true, -1, 0, -1, -1, 1});
  CHECK_THROWS_AS(validate_tree(cycle), TreeError);

  TreeModel stray;
  stray.nodes.push_back({true, -1, 0, -1, -1, 1});
  stray.nodes.push_back({true, -1, 0, -1, -1, 2});  // unreachable
  CHECK_THROWS_AS(validate_tree(stray), TreeError);

  // Feature index beyond the declared input width.
  const TreeModel wide = single_node_tree(0.5);
  CHECK_THROWS_AS(compile_tree(wide, 0), TreeError);
}

TEST_CASE("linear operator file round-trips") {
  Rng rng(29);
  const LinearOperator op{testsup::random_dense(rng, 5, 4)};
  const auto path = std::filesystem::temp_directory_path() / "laq_mlops_linear.txt";
  save_linear(op, path);
  const LinearOperator back = load_linear(path);
  CHECK(back.mat == op.mat);
}
