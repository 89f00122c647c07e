#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "laq/matrix.hpp"

namespace laq {

enum class ColKind { Key, Int, Float };

std::string_view col_kind_name(ColKind k);
ColKind col_kind_from_name(std::string_view name);

struct Schema {
  std::vector<std::pair<std::string, ColKind>> columns;

  Schema() = default;
  Schema(std::initializer_list<std::pair<std::string, ColKind>> cols) : columns(cols) {}

  index_t col_count() const { return static_cast<index_t>(columns.size()); }
  index_t index_of(std::string_view name) const;  // NameError if absent
  ColKind kind(index_t col) const { return columns[col].second; }
  const std::string& name(index_t col) const { return columns[col].first; }

  void validate() const;  // unique names, at least one column

  bool operator==(const Schema&) const = default;
};

using IntColumn = std::vector<std::int64_t>;
using FloatColumn = std::vector<double>;
using Column = std::variant<IntColumn, FloatColumn>;

// Immutable columnar relation. Key and Int columns are 64-bit integers,
// Float columns are 64-bit floats; Key values must be non-negative.
class Table {
 public:
  Table() = default;
  Table(Schema schema, std::vector<Column> columns);

  const Schema& schema() const { return schema_; }
  index_t row_count() const { return row_count_; }
  index_t col_count() const { return schema_.col_count(); }

  const IntColumn& ints(index_t col) const;
  const FloatColumn& floats(index_t col) const;
  const IntColumn& ints(std::string_view name) const { return ints(schema_.index_of(name)); }
  const FloatColumn& floats(std::string_view name) const { return floats(schema_.index_of(name)); }
  const Column& column(index_t col) const { return columns_[col]; }

  double value_as_double(index_t row, index_t col) const;

  bool operator==(const Table&) const = default;

 private:
  Schema schema_;
  std::vector<Column> columns_;
  index_t row_count_ = 0;
};

// CSV wire format: comma separated, no quoting, no header, newline-terminated
// rows; integers base-10, floats in decimal or exponent notation. Nulls
// (empty fields) are rejected.
Table load_csv(const std::filesystem::path& path, const Schema& schema);
void save_csv(const Table& t, const std::filesystem::path& path);

DenseMat to_matrix(const Table& t, std::span<const std::string> columns);
DenseMat to_matrix(const Table& t);  // all columns

struct StarLink {
  std::string fact_fk;
  std::string dim_name;
  std::string dim_pk;

  bool operator==(const StarLink&) const = default;
};

// Fact table plus named dimension tables. Construction verifies that every
// link resolves and that each referenced dimension primary key is unique,
// which downstream fusion correctness depends on.
class StarSchema {
 public:
  StarSchema() = default;
  StarSchema(Table fact, std::vector<std::pair<std::string, Table>> dims, std::vector<StarLink> links);

  const Table& fact() const { return fact_; }
  const Table& dim(std::string_view name) const;
  const std::vector<std::pair<std::string, Table>>& dims() const { return dims_; }
  const std::vector<StarLink>& links() const { return links_; }

 private:
  Table fact_;
  std::vector<std::pair<std::string, Table>> dims_;
  std::vector<StarLink> links_;
};

}  // namespace laq
