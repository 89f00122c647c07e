#include "laq/mlops.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace laq::ml {

index_t TreeModel::leaf_count() const {
  index_t n = 0;
  for (const TreeNode& node : nodes) n += node.is_leaf ? 1 : 0;
  return n;
}

index_t TreeModel::internal_count() const {
  return static_cast<index_t>(nodes.size()) - leaf_count();
}

void validate_tree(const TreeModel& t) {
  const index_t n = static_cast<index_t>(t.nodes.size());
  if (n == 0) throw TreeError("tree has no nodes");

  // Walk from the root; in a well-formed tree every node is reached exactly
  // once, which rules out cycles, shared subtrees and stray roots.
  std::vector<char> visited(static_cast<std::size_t>(n), 0);
  std::vector<index_t> stack{0};
  index_t reached = 0;
  while (!stack.empty()) {
    const index_t id = stack.back();
    stack.pop_back();
    if (id < 0 || id >= n) throw TreeError("child id " + std::to_string(id) + " out of range");
    if (visited[id]) throw TreeError("node " + std::to_string(id) + " reached twice");
    visited[id] = 1;
    ++reached;
    const TreeNode& node = t.nodes[id];
    if (!node.is_leaf) {
      if (node.feature < 0) throw TreeError("node " + std::to_string(id) + " has negative feature");
      stack.push_back(node.false_child);
      stack.push_back(node.true_child);
    }
  }
  if (reached != n) throw TreeError("tree has unreachable nodes");
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_num(std::string_view tok, std::size_t line_no) {
  T v{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw TreeError("tree file line " + std::to_string(line_no) + ": bad number '" + std::string(tok) + "'");
  return v;
}

}  // namespace

TreeModel parse_tree(std::istream& in) {
  std::vector<std::pair<index_t, TreeNode>> parsed;
  std::string line;
  std::size_t line_no = 0;
  index_t max_id = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    TreeNode node;
    index_t id;
    if (toks[0] == "N") {
      if (toks.size() != 6) throw TreeError("tree file line " + std::to_string(line_no) + ": want N <id> <feature> <threshold> <true> <false>");
      id = parse_num<index_t>(toks[1], line_no);
      node.feature = parse_num<index_t>(toks[2], line_no);
      node.threshold = parse_num<double>(toks[3], line_no);
      node.true_child = parse_num<index_t>(toks[4], line_no);
      node.false_child = parse_num<index_t>(toks[5], line_no);
    } else if (toks[0] == "L") {
      if (toks.size() != 3) throw TreeError("tree file line " + std::to_string(line_no) + ": want L <id> <label>");
      id = parse_num<index_t>(toks[1], line_no);
      node.is_leaf = true;
      node.label = parse_num<std::int64_t>(toks[2], line_no);
    } else {
      throw TreeError("tree file line " + std::to_string(line_no) + ": unknown record '" + std::string(toks[0]) + "'");
    }
    if (id < 0) throw TreeError("tree file line " + std::to_string(line_no) + ": negative id");
    max_id = std::max(max_id, id);
    parsed.emplace_back(id, node);
  }
  if (parsed.empty()) throw TreeError("tree file is empty");

  TreeModel t;
  t.nodes.resize(static_cast<std::size_t>(max_id) + 1);
  std::vector<char> defined(t.nodes.size(), 0);
  for (auto& [id, node] : parsed) {
    if (defined[id]) throw TreeError("tree file: node id " + std::to_string(id) + " defined twice");
    defined[id] = 1;
    t.nodes[id] = node;
  }
  for (std::size_t id = 0; id < defined.size(); ++id)
    if (!defined[id]) throw TreeError("tree file: node id " + std::to_string(id) + " missing");
  validate_tree(t);
  return t;
}

TreeModel load_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TreeError("cannot open " + path.string());
  return parse_tree(in);
}

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

void save_tree(const TreeModel& t, std::ostream& out) {
  std::string buf;
  for (std::size_t id = 0; id < t.nodes.size(); ++id) {
    const TreeNode& node = t.nodes[id];
    buf.clear();
    if (node.is_leaf) {
      buf = "L " + std::to_string(id) + " " + std::to_string(node.label);
    } else {
      buf = "N " + std::to_string(id) + " " + std::to_string(node.feature) + " ";
      append_double(buf, node.threshold);
      buf += " " + std::to_string(node.true_child) + " " + std::to_string(node.false_child);
    }
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void save_tree(const TreeModel& t, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw TreeError("cannot write " + path.string());
  save_tree(t, out);
}

LinearOperator load_linear(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string tag;
  index_t rows = 0, cols = 0;
  if (!(in >> tag >> rows >> cols) || tag != "LINEAR" || rows < 0 || cols < 0)
    throw FormatError(path.string() + ": expected 'LINEAR <rows> <cols>' header");
  DenseMat m(rows, cols);
  for (index_t i = 0; i < rows * cols; ++i)
    if (!(in >> m.data()[i])) throw FormatError(path.string() + ": truncated matrix body");
  return LinearOperator{std::move(m)};
}

void save_linear(const LinearOperator& op, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << "LINEAR " << op.mat.rows() << " " << op.mat.cols() << "\n";
  std::string buf;
  for (index_t r = 0; r < op.mat.rows(); ++r) {
    buf.clear();
    for (index_t c = 0; c < op.mat.cols(); ++c) {
      if (c) buf.push_back(' ');
      append_double(buf, op.mat(r, c));
    }
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

TreeLA compile_tree(const TreeModel& t, index_t input_width) {
  validate_tree(t);
  for (const TreeNode& node : t.nodes)
    if (!node.is_leaf && node.feature >= input_width)
      throw TreeError("tree feature " + std::to_string(node.feature) + " exceeds input width " +
                      std::to_string(input_width));

  const index_t p = t.internal_count();
  const index_t l = t.leaf_count();

  TreeLA m;
  m.thresholds.reserve(p);
  m.paths = DenseMat(p, l);
  m.path_score.reserve(l);
  m.labels.reserve(l);

  std::vector<Triplet> f_trips;
  f_trips.reserve(p);

  // Pre-order walk, true branch first; nodes and leaves get consecutive
  // positions in visit order. Each frame re-appends its incoming edge so the
  // shared path buffer is correct whichever subtree is entered next.
  struct Frame {
    index_t id;
    std::size_t path_len;
    index_t parent_pos;
    double sign;
  };
  std::vector<std::pair<index_t, double>> path;
  std::vector<Frame> stack{{0, 0, -1, 0.0}};
  index_t next_node = 0;
  index_t next_leaf = 0;
  while (!stack.empty()) {
    const Frame frame = stack.back();
    stack.pop_back();
    path.resize(frame.path_len);
    if (frame.parent_pos >= 0) path.emplace_back(frame.parent_pos, frame.sign);
    const TreeNode& node = t.nodes[frame.id];
    if (node.is_leaf) {
      const index_t leaf = next_leaf++;
      double trues = 0;
      for (const auto& [node_pos, sign] : path) {
        m.paths(node_pos, leaf) = sign;
        if (sign > 0) trues += 1.0;
      }
      m.path_score.push_back(trues);
      m.labels.push_back(node.label);
    } else {
      const index_t pos = next_node++;
      f_trips.push_back({node.feature, pos, 1.0});
      m.thresholds.push_back(node.threshold);
      // False branch is pushed first so the true branch pops first.
      stack.push_back({node.false_child, path.size(), pos, -1.0});
      stack.push_back({node.true_child, path.size(), pos, 1.0});
    }
  }
  m.feature_map = csr_from_triplets(input_width, p, f_trips);
  return m;
}

DenseMat predict_linear(const DenseMat& t, const LinearOperator& op) {
  return dense_matmul(t, op.mat);
}

std::vector<std::int64_t> predict_tree(const DenseMat& t, const TreeLA& m) {
  if (t.cols() != m.feature_width())
    throw ShapeError("predict_tree: input width " + std::to_string(t.cols()) + " vs model " +
                     std::to_string(m.feature_width()));

  DenseMat tf = dense_times_csr(t, m.feature_map);
  for (index_t i = 0; i < tf.rows(); ++i)
    for (index_t j = 0; j < tf.cols(); ++j)
      tf(i, j) = tf(i, j) > m.thresholds[j] ? 1.0 : 0.0;

  const DenseMat scores = dense_matmul(tf, m.paths);

  std::vector<std::int64_t> out(static_cast<std::size_t>(t.rows()));
  for (index_t i = 0; i < scores.rows(); ++i) {
    index_t hit = -1;
    for (index_t j = 0; j < scores.cols(); ++j) {
      if (scores(i, j) == m.path_score[j]) {
        if (hit >= 0) throw ModelError("predict_tree: row " + std::to_string(i) + " matches several leaves");
        hit = j;
      }
    }
    if (hit < 0) throw ModelError("predict_tree: row " + std::to_string(i) + " matches no leaf");
    out[i] = m.labels[hit];
  }
  return out;
}

}  // namespace laq::ml
