#include "laq/matrix.hpp"

#include <algorithm>
#include <string>

namespace laq {

namespace {

std::string shape_str(index_t r, index_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

DenseMat::DenseMat(index_t rows, index_t cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {
  if (rows < 0 || cols < 0) throw ShapeError("DenseMat: negative dimension");
}

DenseMat::DenseMat(index_t rows, index_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 0 || cols < 0) throw ShapeError("DenseMat: negative dimension");
  if (static_cast<index_t>(data_.size()) != rows * cols)
    throw ShapeError("DenseMat: data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_str(rows, cols));
}

SparseCsr SparseCsr::identity(index_t n) {
  SparseCsr m;
  m.rows = n;
  m.cols = n;
  m.row_ptr.resize(n + 1);
  m.col_idx.resize(n);
  m.values.assign(n, 1.0);
  for (index_t i = 0; i < n; ++i) {
    m.row_ptr[i] = i;
    m.col_idx[i] = i;
  }
  m.row_ptr[n] = n;
  return m;
}

SparseCsr csr_from_triplets(index_t rows, index_t cols, std::span<const Triplet> triplets) {
  if (rows < 0 || cols < 0) throw ShapeError("csr_from_triplets: negative dimension");
  for (const Triplet& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw IndexError("csr_from_triplets: entry (" + std::to_string(t.row) + "," +
                       std::to_string(t.col) + ") outside " + shape_str(rows, cols));
  }

  std::vector<Triplet> sorted(triplets.begin(), triplets.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseCsr out;
  out.rows = rows;
  out.cols = cols;
  out.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);

  std::size_t i = 0;
  while (i < sorted.size()) {
    const index_t r = sorted[i].row;
    const index_t c = sorted[i].col;
    double sum = 0.0;
    while (i < sorted.size() && sorted[i].row == r && sorted[i].col == c) {
      sum += sorted[i].value;
      ++i;
    }
    if (sum != 0.0) {
      out.col_idx.push_back(c);
      out.values.push_back(sum);
      ++out.row_ptr[r + 1];
    }
  }
  for (index_t r = 0; r < rows; ++r) out.row_ptr[r + 1] += out.row_ptr[r];
  return out;
}

SparseCsr spmm(const SparseCsr& a, const SparseCsr& b) {
  if (a.cols != b.rows)
    throw ShapeError("spmm: " + shape_str(a.rows, a.cols) + " x " + shape_str(b.rows, b.cols));

  SparseCsr c;
  c.rows = a.rows;
  c.cols = b.cols;
  c.row_ptr.assign(1, 0);
  c.row_ptr.reserve(a.rows + 1);

  // Per-row dense accumulator plus a touched-column list; the list is sorted
  // before emission so output stays canonical regardless of operand order.
  std::vector<double> acc(static_cast<std::size_t>(b.cols), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(b.cols), 0);
  std::vector<index_t> touched;

  for (index_t i = 0; i < a.rows; ++i) {
    touched.clear();
    for (index_t jj = a.row_ptr[i]; jj < a.row_ptr[i + 1]; ++jj) {
      const index_t k = a.col_idx[jj];
      const double av = a.values[jj];
      for (index_t kk = b.row_ptr[k]; kk < b.row_ptr[k + 1]; ++kk) {
        const index_t j = b.col_idx[kk];
        if (!seen[j]) {
          seen[j] = 1;
          acc[j] = 0.0;
          touched.push_back(j);
        }
        acc[j] += av * b.values[kk];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (index_t j : touched) {
      if (acc[j] != 0.0) {
        c.col_idx.push_back(j);
        c.values.push_back(acc[j]);
      }
      seen[j] = 0;
    }
    c.row_ptr.push_back(c.nnz());
  }
  return c;
}

DenseMat spmm_dense(const SparseCsr& a, const DenseMat& b) {
  if (a.cols != b.rows())
    throw ShapeError("spmm_dense: " + shape_str(a.rows, a.cols) + " x " + shape_str(b.rows(), b.cols()));
  DenseMat out(a.rows, b.cols());
  const index_t n = b.cols();
  for (index_t i = 0; i < a.rows; ++i) {
    double* dst = out.row(i);
    for (index_t jj = a.row_ptr[i]; jj < a.row_ptr[i + 1]; ++jj) {
      const double av = a.values[jj];
      const double* src = b.row(a.col_idx[jj]);
      for (index_t j = 0; j < n; ++j) dst[j] += av * src[j];
    }
  }
  return out;
}

DenseMat dense_times_csr(const DenseMat& a, const SparseCsr& b) {
  if (a.cols() != b.rows)
    throw ShapeError("dense_times_csr: " + shape_str(a.rows(), a.cols()) + " x " + shape_str(b.rows, b.cols));
  DenseMat out(a.rows(), b.cols);
  for (index_t i = 0; i < a.rows(); ++i) {
    const double* src = a.row(i);
    double* dst = out.row(i);
    for (index_t r = 0; r < b.rows; ++r) {
      const double av = src[r];
      if (av == 0.0) continue;
      for (index_t jj = b.row_ptr[r]; jj < b.row_ptr[r + 1]; ++jj)
        dst[b.col_idx[jj]] += av * b.values[jj];
    }
  }
  return out;
}

DenseMat dense_matmul(const DenseMat& a, const DenseMat& b) {
  if (a.cols() != b.rows())
    throw ShapeError("dense_matmul: " + shape_str(a.rows(), a.cols()) + " x " + shape_str(b.rows(), b.cols()));
  DenseMat out(a.rows(), b.cols());
  const index_t n = b.cols();
  for (index_t i = 0; i < a.rows(); ++i) {
    const double* arow = a.row(i);
    double* dst = out.row(i);
    for (index_t k = 0; k < a.cols(); ++k) {
      const double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = b.row(k);
      for (index_t j = 0; j < n; ++j) dst[j] += av * brow[j];
    }
  }
  return out;
}

SparseCsr transpose(const SparseCsr& a) {
  SparseCsr t;
  t.rows = a.cols;
  t.cols = a.rows;
  t.row_ptr.assign(static_cast<std::size_t>(a.cols) + 1, 0);
  t.col_idx.resize(a.col_idx.size());
  t.values.resize(a.values.size());

  for (index_t c : a.col_idx) ++t.row_ptr[c + 1];
  for (index_t c = 0; c < a.cols; ++c) t.row_ptr[c + 1] += t.row_ptr[c];

  std::vector<index_t> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (index_t i = 0; i < a.rows; ++i) {
    for (index_t jj = a.row_ptr[i]; jj < a.row_ptr[i + 1]; ++jj) {
      const index_t pos = next[a.col_idx[jj]]++;
      t.col_idx[pos] = i;
      t.values[pos] = a.values[jj];
    }
  }
  return t;
}

SparseCoo coo_from_csr(const SparseCsr& a) {
  SparseCoo c;
  c.rows = a.rows;
  c.cols = a.cols;
  c.row_idx.reserve(a.nnz());
  c.col_idx = a.col_idx;
  c.values = a.values;
  for (index_t i = 0; i < a.rows; ++i)
    for (index_t jj = a.row_ptr[i]; jj < a.row_ptr[i + 1]; ++jj) c.row_idx.push_back(i);
  return c;
}

SparseCsr csr_from_coo(const SparseCoo& a) {
  check_canonical(a);
  SparseCsr c;
  c.rows = a.rows;
  c.cols = a.cols;
  c.row_ptr.assign(static_cast<std::size_t>(a.rows) + 1, 0);
  c.col_idx = a.col_idx;
  c.values = a.values;
  for (index_t r : a.row_idx) ++c.row_ptr[r + 1];
  for (index_t r = 0; r < a.rows; ++r) c.row_ptr[r + 1] += c.row_ptr[r];
  return c;
}

DenseMat dense_from_csr(const SparseCsr& a) {
  DenseMat out(a.rows, a.cols);
  for (index_t i = 0; i < a.rows; ++i)
    for (index_t jj = a.row_ptr[i]; jj < a.row_ptr[i + 1]; ++jj)
      out(i, a.col_idx[jj]) = a.values[jj];
  return out;
}

void check_canonical(const SparseCsr& a) {
  if (a.rows < 0 || a.cols < 0) throw Error("csr: negative dimension");
  if (static_cast<index_t>(a.row_ptr.size()) != a.rows + 1) throw Error("csr: row_ptr length");
  if (a.row_ptr.front() != 0) throw Error("csr: row_ptr[0] != 0");
  if (a.row_ptr.back() != a.nnz()) throw Error("csr: row_ptr[rows] != nnz");
  if (a.values.size() != a.col_idx.size()) throw Error("csr: values length");
  for (index_t i = 0; i < a.rows; ++i) {
    if (a.row_ptr[i] > a.row_ptr[i + 1]) throw Error("csr: row_ptr decreasing");
    for (index_t jj = a.row_ptr[i]; jj < a.row_ptr[i + 1]; ++jj) {
      if (a.col_idx[jj] < 0 || a.col_idx[jj] >= a.cols) throw Error("csr: column out of bounds");
      if (jj > a.row_ptr[i] && a.col_idx[jj] <= a.col_idx[jj - 1])
        throw Error("csr: columns not strictly increasing in row " + std::to_string(i));
      if (a.values[jj] == 0.0) throw Error("csr: explicit zero stored");
    }
  }
}

void check_canonical(const SparseCoo& a) {
  if (a.rows < 0 || a.cols < 0) throw Error("coo: negative dimension");
  if (a.row_idx.size() != a.col_idx.size() || a.values.size() != a.col_idx.size())
    throw Error("coo: index/value length mismatch");
  for (index_t m = 0; m < a.nnz(); ++m) {
    if (a.row_idx[m] < 0 || a.row_idx[m] >= a.rows || a.col_idx[m] < 0 || a.col_idx[m] >= a.cols)
      throw Error("coo: entry out of bounds");
    if (m > 0) {
      const bool ordered = a.row_idx[m] > a.row_idx[m - 1] ||
                           (a.row_idx[m] == a.row_idx[m - 1] && a.col_idx[m] > a.col_idx[m - 1]);
      if (!ordered) throw Error("coo: entries not sorted or duplicated");
    }
  }
}

}  // namespace laq
