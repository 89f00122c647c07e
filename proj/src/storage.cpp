#include "laq/storage.hpp"

#include <charconv>
#include <fstream>
#include <unordered_set>

namespace laq {

std::string_view col_kind_name(ColKind k) {
  switch (k) {
    case ColKind::Key: return "key";
    case ColKind::Int: return "int";
    case ColKind::Float: return "float";
  }
  return "?";
}

ColKind col_kind_from_name(std::string_view name) {
  if (name == "key") return ColKind::Key;
  if (name == "int") return ColKind::Int;
  if (name == "float") return ColKind::Float;
  throw FormatError("unknown column kind: " + std::string(name));
}

index_t Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].first == name) return static_cast<index_t>(i);
  throw NameError("unknown column: " + std::string(name));
}

void Schema::validate() const {
  if (columns.empty()) throw FormatError("schema has no columns");
  std::unordered_set<std::string_view> names;
  for (const auto& [name, kind] : columns)
    if (!names.insert(name).second) throw NameError("duplicate column name: " + name);
}

Table::Table(Schema schema, std::vector<Column> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  schema_.validate();
  if (columns_.size() != schema_.columns.size())
    throw ShapeError("table: column count does not match schema");
  for (index_t c = 0; c < col_count(); ++c) {
    const ColKind kind = schema_.kind(c);
    const bool is_int = std::holds_alternative<IntColumn>(columns_[c]);
    if ((kind == ColKind::Float) == is_int)
      throw TypeError("table: column '" + schema_.name(c) + "' storage does not match kind");
    const index_t len = is_int ? static_cast<index_t>(std::get<IntColumn>(columns_[c]).size())
                               : static_cast<index_t>(std::get<FloatColumn>(columns_[c]).size());
    if (c == 0)
      row_count_ = len;
    else if (len != row_count_)
      throw ShapeError("table: column '" + schema_.name(c) + "' length mismatch");
    if (kind == ColKind::Key)
      for (std::int64_t v : std::get<IntColumn>(columns_[c]))
        if (v < 0) throw FormatError("table: negative key in column '" + schema_.name(c) + "'");
  }
}

const IntColumn& Table::ints(index_t col) const {
  if (col < 0 || col >= col_count()) throw IndexError("table: column index out of range");
  if (!std::holds_alternative<IntColumn>(columns_[col]))
    throw TypeError("table: column '" + schema_.name(col) + "' is not integer");
  return std::get<IntColumn>(columns_[col]);
}

const FloatColumn& Table::floats(index_t col) const {
  if (col < 0 || col >= col_count()) throw IndexError("table: column index out of range");
  if (!std::holds_alternative<FloatColumn>(columns_[col]))
    throw TypeError("table: column '" + schema_.name(col) + "' is not float");
  return std::get<FloatColumn>(columns_[col]);
}

double Table::value_as_double(index_t row, index_t col) const {
  if (std::holds_alternative<IntColumn>(columns_[col]))
    return static_cast<double>(std::get<IntColumn>(columns_[col])[row]);
  return std::get<FloatColumn>(columns_[col])[row];
}

namespace {

std::int64_t parse_int(std::string_view field, std::size_t line_no) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw FormatError("line " + std::to_string(line_no) + ": bad integer '" + std::string(field) + "'");
  return v;
}

double parse_float(std::string_view field, std::size_t line_no) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw FormatError("line " + std::to_string(line_no) + ": bad float '" + std::string(field) + "'");
  return v;
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

void append_number(std::string& out, std::int64_t v) {
  char buf[24];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

Table load_csv(const std::filesystem::path& path, const Schema& schema) {
  schema.validate();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());

  const index_t ncols = schema.col_count();
  std::vector<Column> cols;
  cols.reserve(ncols);
  for (index_t c = 0; c < ncols; ++c) {
    if (schema.kind(c) == ColKind::Float)
      cols.emplace_back(FloatColumn{});
    else
      cols.emplace_back(IntColumn{});
  }

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && ncols == 1) {
      // A lone empty line is a missing value, not an empty row.
      throw FormatError("line " + std::to_string(line_no) + ": missing value");
    }
    std::string_view rest = line;
    for (index_t c = 0; c < ncols; ++c) {
      const std::size_t comma = rest.find(',');
      const bool last = c == ncols - 1;
      if (last != (comma == std::string_view::npos))
        throw FormatError("line " + std::to_string(line_no) + ": expected " +
                          std::to_string(ncols) + " fields");
      const std::string_view field = last ? rest : rest.substr(0, comma);
      if (field.empty()) throw FormatError("line " + std::to_string(line_no) + ": missing value");
      if (schema.kind(c) == ColKind::Float)
        std::get<FloatColumn>(cols[c]).push_back(parse_float(field, line_no));
      else
        std::get<IntColumn>(cols[c]).push_back(parse_int(field, line_no));
      if (!last) rest.remove_prefix(comma + 1);
    }
  }
  return Table(schema, std::move(cols));
}

void save_csv(const Table& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  std::string buf;
  for (index_t r = 0; r < t.row_count(); ++r) {
    buf.clear();
    for (index_t c = 0; c < t.col_count(); ++c) {
      if (c) buf.push_back(',');
      if (std::holds_alternative<IntColumn>(t.column(c)))
        append_number(buf, std::get<IntColumn>(t.column(c))[r]);
      else
        append_number(buf, std::get<FloatColumn>(t.column(c))[r]);
    }
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!out) throw FormatError("write failed: " + path.string());
}

DenseMat to_matrix(const Table& t, std::span<const std::string> columns) {
  std::vector<index_t> idx;
  idx.reserve(columns.size());
  for (const std::string& name : columns) idx.push_back(t.schema().index_of(name));

  DenseMat out(t.row_count(), static_cast<index_t>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    const Column& col = t.column(idx[j]);
    if (std::holds_alternative<IntColumn>(col)) {
      const IntColumn& v = std::get<IntColumn>(col);
      for (index_t r = 0; r < t.row_count(); ++r) out(r, static_cast<index_t>(j)) = static_cast<double>(v[r]);
    } else {
      const FloatColumn& v = std::get<FloatColumn>(col);
      for (index_t r = 0; r < t.row_count(); ++r) out(r, static_cast<index_t>(j)) = v[r];
    }
  }
  return out;
}

DenseMat to_matrix(const Table& t) {
  std::vector<std::string> names;
  names.reserve(t.col_count());
  for (const auto& [name, kind] : t.schema().columns) names.push_back(name);
  return to_matrix(t, names);
}

StarSchema::StarSchema(Table fact, std::vector<std::pair<std::string, Table>> dims,
                       std::vector<StarLink> links)
    : fact_(std::move(fact)), dims_(std::move(dims)), links_(std::move(links)) {
  for (const StarLink& link : links_) {
    fact_.schema().index_of(link.fact_fk);
    const Table& d = dim(link.dim_name);
    const IntColumn& pk = d.ints(link.dim_pk);
    std::unordered_set<std::int64_t> seen;
    seen.reserve(pk.size());
    for (std::int64_t k : pk)
      if (!seen.insert(k).second)
        throw DuplicateKeyError("star schema: duplicate primary key " + std::to_string(k) +
                                " in " + link.dim_name + "." + link.dim_pk);
  }
}

const Table& StarSchema::dim(std::string_view name) const {
  for (const auto& [dim_name, table] : dims_)
    if (dim_name == name) return table;
  throw NameError("unknown dimension: " + std::string(name));
}

}  // namespace laq
