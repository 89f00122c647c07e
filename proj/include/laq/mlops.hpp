#pragma once

#include <filesystem>
#include <iosfwd>

#include "laq/matrix.hpp"

namespace laq::ml {

// Dense linear operator (input-width x output-width).
struct LinearOperator {
  DenseMat mat;
};

// Decision tree node; internal when is_leaf is false. Children are node ids
// indexing TreeModel::nodes. The split predicate is feature > threshold,
// with ties taking the false branch.
struct TreeNode {
  bool is_leaf = false;
  index_t feature = -1;
  double threshold = 0.0;
  index_t true_child = -1;
  index_t false_child = -1;
  std::int64_t label = 0;
};

struct TreeModel {
  std::vector<TreeNode> nodes;  // node ids index this vector; root is id 0

  index_t leaf_count() const;
  index_t internal_count() const;
};

// Throws TreeError unless nodes form a single tree rooted at id 0 with two
// valid children per internal node.
void validate_tree(const TreeModel& t);

// Line-oriented text format, one node per line:
//   N <id> <feature> <threshold> <true_child> <false_child>
//   L <id> <label>
TreeModel parse_tree(std::istream& in);
TreeModel load_tree(const std::filesystem::path& path);
void save_tree(const TreeModel& t, std::ostream& out);
void save_tree(const TreeModel& t, const std::filesystem::path& path);

LinearOperator load_linear(const std::filesystem::path& path);
void save_linear(const LinearOperator& op, const std::filesystem::path& path);

// Tensorized decision tree. Nodes and leaves are numbered by a pre-order
// walk (true branch first).
//
//   feature_map  F (k x p): column j selects the feature tested by node j
//   thresholds   v (p):     node split values
//   paths        H (p x l): column j marks leaf j's root path, +1 where the
//                           path takes the true branch and -1 for false
//   path_score   h (l):     count of +1 entries in H column j; a row lands
//                           in leaf j exactly when its predicate vector
//                           scores h[j] against column j
//   labels       (l):       leaf class ids
struct TreeLA {
  SparseCsr feature_map;
  std::vector<double> thresholds;
  DenseMat paths;
  std::vector<double> path_score;
  std::vector<std::int64_t> labels;

  index_t feature_width() const { return feature_map.rows; }
  index_t node_count() const { return feature_map.cols; }
  index_t leaf_count() const { return paths.cols(); }
};

TreeLA compile_tree(const TreeModel& t, index_t input_width);

DenseMat predict_linear(const DenseMat& t, const LinearOperator& op);

// ((T F > v) H) == h, resolved to leaf labels. Throws ModelError if a row
// matches no leaf or several, which signals a violated model invariant.
std::vector<std::int64_t> predict_tree(const DenseMat& t, const TreeLA& m);

}  // namespace laq::ml
