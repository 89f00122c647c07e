#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "laq/error.hpp"

namespace laq {

using index_t = std::int64_t;

// Row-major dense matrix of 64-bit floats. Every value-bearing operand in
// the engine (materialized tables, model weights, tree path matrices) lives
// in one of these or in the two sparse formats below.
class DenseMat {
 public:
  DenseMat() = default;
  DenseMat(index_t rows, index_t cols, double fill = 0.0);
  DenseMat(index_t rows, index_t cols, std::vector<double> data);

  index_t rows() const { return rows_; }
  index_t cols() const { return cols_; }

  double operator()(index_t r, index_t c) const { return data_[r * cols_ + c]; }
  double& operator()(index_t r, index_t c) { return data_[r * cols_ + c]; }

  const double* row(index_t r) const { return data_.data() + r * cols_; }
  double* row(index_t r) { return data_.data() + r * cols_; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool operator==(const DenseMat&) const = default;

 private:
  index_t rows_ = 0;
  index_t cols_ = 0;
  std::vector<double> data_;
};

// Compressed sparse row. Canonical form: row_ptr non-decreasing with
// row_ptr[0] == 0 and row_ptr[rows] == nnz, column indices strictly
// increasing within each row, and no explicitly stored zeros.
struct SparseCsr {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<index_t> row_ptr{0};
  std::vector<index_t> col_idx;
  std::vector<double> values;

  index_t nnz() const { return static_cast<index_t>(col_idx.size()); }

  static SparseCsr identity(index_t n);

  bool operator==(const SparseCsr&) const = default;
};

// Coordinate form, sorted lexicographically by (row, col), no duplicates.
struct SparseCoo {
  index_t rows = 0;
  index_t cols = 0;
  std::vector<index_t> row_idx;
  std::vector<index_t> col_idx;
  std::vector<double> values;

  index_t nnz() const { return static_cast<index_t>(col_idx.size()); }

  bool operator==(const SparseCoo&) const = default;
};

struct Triplet {
  index_t row = 0;
  index_t col = 0;
  double value = 0.0;
};

// Builds canonical CSR from unordered triplets; duplicate (row, col) entries
// are summed and entries whose sum is exactly zero are dropped.
SparseCsr csr_from_triplets(index_t rows, index_t cols, std::span<const Triplet> triplets);

// Sparse-sparse product, row-wise Gustavson accumulation. Output is
// canonical and deterministic for a fixed input; exact for integer-valued
// operands representable in 64-bit floats.
SparseCsr spmm(const SparseCsr& a, const SparseCsr& b);

// Sparse times dense and dense times sparse products.
DenseMat spmm_dense(const SparseCsr& a, const DenseMat& b);
DenseMat dense_times_csr(const DenseMat& a, const SparseCsr& b);

DenseMat dense_matmul(const DenseMat& a, const DenseMat& b);

SparseCsr transpose(const SparseCsr& a);
SparseCoo coo_from_csr(const SparseCsr& a);
SparseCsr csr_from_coo(const SparseCoo& a);
DenseMat dense_from_csr(const SparseCsr& a);

// Canonical-form validators; throw Error with a description on violation.
void check_canonical(const SparseCsr& a);
void check_canonical(const SparseCoo& a);

}  // namespace laq
