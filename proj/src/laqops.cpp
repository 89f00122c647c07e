#include "laq/laqops.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <unordered_set>

namespace laq::ops {

namespace {

class StageTimer {
 public:
  explicit StageTimer(double* sink) : sink_(sink), start_(clock::now()) {}
  ~StageTimer() {
    if (sink_) *sink_ += std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  double* sink_;
  clock::time_point start_;
};

ColumnMap make_map(index_t source_cols, index_t target_cols,
                   std::span<const std::pair<index_t, index_t>> mapping, bool full) {
  std::vector<char> claimed(static_cast<std::size_t>(target_cols), 0);
  std::vector<Triplet> trips;
  trips.reserve(mapping.size());
  for (const auto& [src, tgt] : mapping) {
    if (src < 0 || src >= source_cols)
      throw IndexError("column map: source index " + std::to_string(src) + " out of range");
    if (tgt < 0 || tgt >= target_cols)
      throw MappingError("column map: target index " + std::to_string(tgt) + " out of range");
    if (claimed[tgt])
      throw MappingError("column map: duplicate target index " + std::to_string(tgt));
    claimed[tgt] = 1;
    trips.push_back({src, tgt, 1.0});
  }
  if (full && static_cast<index_t>(mapping.size()) != target_cols)
    throw MappingError("column map: every target column needs exactly one source");
  return ColumnMap{csr_from_triplets(source_cols, target_cols, trips)};
}

}  // namespace

ColumnMap build_column_map(index_t source_cols,
                           std::span<const std::pair<index_t, index_t>> mapping) {
  return make_map(source_cols, static_cast<index_t>(mapping.size()), mapping, true);
}

ColumnMap build_placement_map(index_t source_cols, index_t target_cols,
                              std::span<const std::pair<index_t, index_t>> mapping) {
  return make_map(source_cols, target_cols, mapping, false);
}

DenseMat project(const DenseMat& t, const ColumnMap& m) {
  return dense_times_csr(t, m.mat);
}

index_t SelectionMask::count() const {
  return static_cast<index_t>(std::count(bits.begin(), bits.end(), true));
}

SelectionMask build_selection_mask(const IntColumn& col, const Predicate& pred) {
  SelectionMask mask;
  mask.bits.resize(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) mask.bits[i] = pred.matches(col[i]);
  return mask;
}

SelectionMask build_selection_mask(const FloatColumn& col, const Predicate& pred) {
  SelectionMask mask;
  mask.bits.resize(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) mask.bits[i] = pred.matches(col[i]);
  return mask;
}

SelectionMask mask_and(const SelectionMask& a, const SelectionMask& b) {
  if (a.size() != b.size()) throw ShapeError("mask_and: length mismatch");
  SelectionMask out;
  out.bits.resize(a.bits.size());
  for (std::size_t i = 0; i < a.bits.size(); ++i) out.bits[i] = a.bits[i] && b.bits[i];
  return out;
}

Table apply_mask(const Table& t, const SelectionMask& mask) {
  if (mask.size() != t.row_count()) throw ShapeError("apply_mask: mask length mismatch");
  std::vector<Column> cols;
  cols.reserve(t.col_count());
  for (index_t c = 0; c < t.col_count(); ++c) {
    if (std::holds_alternative<IntColumn>(t.column(c))) {
      const IntColumn& src = std::get<IntColumn>(t.column(c));
      IntColumn dst;
      dst.reserve(mask.count());
      for (std::size_t i = 0; i < src.size(); ++i)
        if (mask.bits[i]) dst.push_back(src[i]);
      cols.emplace_back(std::move(dst));
    } else {
      const FloatColumn& src = std::get<FloatColumn>(t.column(c));
      FloatColumn dst;
      dst.reserve(mask.count());
      for (std::size_t i = 0; i < src.size(); ++i)
        if (mask.bits[i]) dst.push_back(src[i]);
      cols.emplace_back(std::move(dst));
    }
  }
  return Table(t.schema(), std::move(cols));
}

DenseMat apply_mask(const DenseMat& t, const SelectionMask& mask) {
  if (mask.size() != t.rows()) throw ShapeError("apply_mask: mask length mismatch");
  DenseMat out(mask.count(), t.cols());
  index_t m = 0;
  for (index_t i = 0; i < t.rows(); ++i) {
    if (!mask.bits[i]) continue;
    std::copy(t.row(i), t.row(i) + t.cols(), out.row(m));
    ++m;
  }
  return out;
}

index_t KeyDomain::position(std::int64_t key) const {
  const auto it = index.find(key);
  if (it == index.end()) throw DomainError("key " + std::to_string(key) + " not in domain");
  return it->second;
}

namespace {

KeyDomain domain_from_sorted(std::vector<std::int64_t> keys) {
  KeyDomain d;
  d.sorted_keys = std::move(keys);
  d.index.reserve(d.sorted_keys.size());
  for (std::size_t i = 0; i < d.sorted_keys.size(); ++i)
    d.index.emplace(d.sorted_keys[i], static_cast<index_t>(i));
  return d;
}

}  // namespace

KeyDomain build_key_domain(std::span<const std::int64_t> keys_r,
                           std::span<const std::int64_t> keys_s, bool /*sorted*/) {
  // The domain is kept in ascending order either way; the sorted flag exists
  // because callers joining on sort keys rely on that order being guaranteed.
  std::vector<std::int64_t> all;
  all.reserve(keys_r.size() + keys_s.size());
  all.insert(all.end(), keys_r.begin(), keys_r.end());
  all.insert(all.end(), keys_s.begin(), keys_s.end());
  for (std::int64_t k : all)
    if (k < 0) throw DomainError("negative join key " + std::to_string(k));
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return domain_from_sorted(std::move(all));
}

KeyDomain update_key_domain(const KeyDomain& d, std::span<const std::int64_t> new_keys) {
  std::vector<std::int64_t> fresh;
  for (std::int64_t k : new_keys) {
    if (k < 0) throw DomainError("negative join key " + std::to_string(k));
    if (!d.contains(k)) fresh.push_back(k);
  }
  if (fresh.empty()) return d;
  std::sort(fresh.begin(), fresh.end());
  fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());

  std::vector<std::int64_t> merged(d.sorted_keys.size() + fresh.size());
  std::merge(d.sorted_keys.begin(), d.sorted_keys.end(), fresh.begin(), fresh.end(),
             merged.begin());
  return domain_from_sorted(std::move(merged));
}

SparseCsr key_matrix(std::span<const std::int64_t> keys, const KeyDomain& domain,
                     KeyOrientation orientation, std::span<const double> values) {
  if (!values.empty() && values.size() != keys.size())
    throw ShapeError("key_matrix: values length mismatch");
  const index_t n = static_cast<index_t>(keys.size());
  const index_t d = domain.size();

  SparseCsr m;
  if (orientation == KeyOrientation::RowsByDomain) {
    m.rows = n;
    m.cols = d;
    m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
    for (index_t i = 0; i < n; ++i) {
      const double v = values.empty() ? 1.0 : values[i];
      m.row_ptr[i + 1] = m.row_ptr[i];
      if (v == 0.0) {
        domain.position(keys[i]);  // still validate the key
        continue;
      }
      m.col_idx.push_back(domain.position(keys[i]));
      m.values.push_back(v);
      ++m.row_ptr[i + 1];
    }
  } else {
    // Counting sort by domain position keeps columns ascending per row.
    m.rows = d;
    m.cols = n;
    m.row_ptr.assign(static_cast<std::size_t>(d) + 1, 0);
    std::vector<index_t> pos(static_cast<std::size_t>(n));
    for (index_t i = 0; i < n; ++i) {
      pos[i] = domain.position(keys[i]);
      const double v = values.empty() ? 1.0 : values[i];
      if (v != 0.0) ++m.row_ptr[pos[i] + 1];
    }
    for (index_t r = 0; r < d; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    m.col_idx.resize(m.row_ptr.back());
    m.values.resize(m.row_ptr.back());
    std::vector<index_t> next(m.row_ptr.begin(), m.row_ptr.end() - 1);
    for (index_t i = 0; i < n; ++i) {
      const double v = values.empty() ? 1.0 : values[i];
      if (v == 0.0) continue;
      const index_t slot = next[pos[i]]++;
      m.col_idx[slot] = i;
      m.values[slot] = v;
    }
  }
  return m;
}

RowMatch mm_join(std::span<const std::int64_t> keys_r, std::span<const std::int64_t> keys_s) {
  return mm_join(keys_r, keys_s, build_key_domain(keys_r, keys_s));
}

RowMatch mm_join(std::span<const std::int64_t> keys_r, std::span<const std::int64_t> keys_s,
                 const KeyDomain& domain) {
  const SparseCsr mat_r = key_matrix(keys_r, domain, KeyOrientation::RowsByDomain);
  const SparseCsr mat_s = key_matrix(keys_s, domain, KeyOrientation::DomainByRows);
  return RowMatch{coo_from_csr(spmm(mat_r, mat_s))};
}

std::vector<RowMatch> multiway_star_join(const Table& fact, std::span<const DimJoinSpec> dims,
                                         std::vector<index_t>* surviving_fact_rows,
                                         JoinStageTimes* times,
                                         std::span<const KeyDomain> cached_domains) {
  if (!cached_domains.empty() && cached_domains.size() != dims.size())
    throw ShapeError("multiway_star_join: cached domain count mismatch");

  std::vector<index_t> survivors(static_cast<std::size_t>(fact.row_count()));
  std::iota(survivors.begin(), survivors.end(), index_t{0});
  std::vector<std::vector<index_t>> matched_dim_row(dims.size());

  for (std::size_t j = 0; j < dims.size(); ++j) {
    const IntColumn& fks = fact.ints(dims[j].fk_col);
    const IntColumn& pks = dims[j].dim->ints(dims[j].pk_col);

    SparseCsr mat_r, mat_s;
    std::vector<std::int64_t> keys;
    {
      StageTimer t(times ? &times->construct : nullptr);
      std::unordered_set<std::int64_t> uniq(pks.begin(), pks.end());
      if (uniq.size() != pks.size())
        throw DuplicateKeyError("multiway_star_join: duplicate keys in " + dims[j].pk_col);
      keys.reserve(survivors.size());
      for (index_t row : survivors) keys.push_back(fks[row]);
    }

    KeyDomain local;
    const KeyDomain* domain = nullptr;
    {
      StageTimer t(times ? &times->domain_gen : nullptr);
      if (cached_domains.empty()) {
        local = build_key_domain(keys, pks);
        domain = &local;
      } else {
        domain = &cached_domains[j];
      }
    }

    {
      StageTimer t(times ? &times->construct : nullptr);
      mat_r = key_matrix(keys, *domain, KeyOrientation::RowsByDomain);
      mat_s = key_matrix(pks, *domain, KeyOrientation::DomainByRows);
    }

    SparseCoo match;
    {
      StageTimer t(times ? &times->spmm : nullptr);
      match = coo_from_csr(spmm(mat_r, mat_s));
    }

    // Unique dim keys mean at most one entry per target row; rows absent
    // from `match` failed this dimension and drop out of every earlier map.
    StageTimer t(times ? &times->construct : nullptr);
    std::vector<index_t> next_survivors;
    next_survivors.reserve(match.nnz());
    for (index_t m = 0; m < match.nnz(); ++m)
      next_survivors.push_back(survivors[match.row_idx[m]]);
    for (std::size_t jj = 0; jj < j; ++jj) {
      std::vector<index_t> compact;
      compact.reserve(match.nnz());
      for (index_t m = 0; m < match.nnz(); ++m)
        compact.push_back(matched_dim_row[jj][match.row_idx[m]]);
      matched_dim_row[jj] = std::move(compact);
    }
    matched_dim_row[j].assign(match.col_idx.begin(), match.col_idx.end());
    survivors = std::move(next_survivors);
  }

  std::vector<RowMatch> result;
  result.reserve(dims.size());
  const index_t nnz = static_cast<index_t>(survivors.size());
  {
    StageTimer t(times ? &times->construct : nullptr);
    for (std::size_t j = 0; j < dims.size(); ++j) {
      SparseCoo coo;
      coo.rows = nnz;
      coo.cols = dims[j].dim->row_count();
      coo.row_idx.resize(nnz);
      std::iota(coo.row_idx.begin(), coo.row_idx.end(), index_t{0});
      coo.col_idx = std::move(matched_dim_row[j]);
      coo.values.assign(static_cast<std::size_t>(nnz), 1.0);
      result.push_back(RowMatch{std::move(coo)});
    }
  }
  if (surviving_fact_rows) *surviving_fact_rows = std::move(survivors);
  return result;
}

std::pair<SparseCsr, SparseCsr> row_mapping_matrices(const RowMatch& i) {
  check_canonical(i.mat);
  const index_t nnz = i.nnz();

  const auto one_hot = [nnz](const std::vector<index_t>& src_rows, index_t src_count) {
    SparseCsr m;
    m.rows = nnz;
    m.cols = src_count;
    m.row_ptr.resize(static_cast<std::size_t>(nnz) + 1);
    m.col_idx = src_rows;
    m.values.assign(static_cast<std::size_t>(nnz), 1.0);
    std::iota(m.row_ptr.begin(), m.row_ptr.end(), index_t{0});
    return m;
  };
  return {one_hot(i.mat.row_idx, i.mat.rows), one_hot(i.mat.col_idx, i.mat.cols)};
}

DenseMat materialize(std::span<const SparseCsr> i_maps, std::span<const DenseMat> table_mats,
                     std::span<const ColumnMap> col_maps) {
  if (i_maps.empty() || i_maps.size() != table_mats.size() || i_maps.size() != col_maps.size())
    throw ShapeError("materialize: input list lengths");
  const index_t nnz = i_maps[0].rows;
  const index_t k = col_maps[0].mat.cols;

  std::vector<char> claimed(static_cast<std::size_t>(k), 0);
  for (std::size_t j = 0; j < i_maps.size(); ++j) {
    if (i_maps[j].rows != nnz) throw ShapeError("materialize: row mapping row counts differ");
    if (col_maps[j].mat.cols != k) throw ShapeError("materialize: target widths differ");
    if (i_maps[j].cols != table_mats[j].rows())
      throw ShapeError("materialize: row mapping does not fit source table");
    if (table_mats[j].cols() != col_maps[j].mat.rows)
      throw ShapeError("materialize: column map does not fit source table");
    for (index_t tgt : col_maps[j].mat.col_idx) {
      if (claimed[tgt]) throw MappingError("materialize: overlapping target column " + std::to_string(tgt));
      claimed[tgt] = 1;
    }
  }

  // T = sum_j I_j (B_j M_j), evaluated as (I_j B_j) M_j: gather matched rows
  // first, then place the gathered block into its target slice.
  DenseMat target(nnz, k);
  for (std::size_t j = 0; j < i_maps.size(); ++j) {
    const DenseMat gathered = spmm_dense(i_maps[j], table_mats[j]);
    const SparseCsr& map = col_maps[j].mat;
    for (index_t src = 0; src < map.rows; ++src) {
      for (index_t jj = map.row_ptr[src]; jj < map.row_ptr[src + 1]; ++jj) {
        const index_t tgt = map.col_idx[jj];
        const double v = map.values[jj];
        for (index_t r = 0; r < nnz; ++r) target(r, tgt) += v * gathered(r, src);
      }
    }
  }
  return target;
}

std::vector<GroupSum> groupby_sum_single(std::span<const std::int64_t> keys_r,
                                         std::span<const double> vals_r,
                                         std::span<const std::int64_t> keys_s,
                                         std::span<const std::int64_t> group_s) {
  if (keys_r.size() != vals_r.size()) throw ShapeError("groupby_sum_single: R lengths");
  if (keys_s.size() != group_s.size()) throw ShapeError("groupby_sum_single: S lengths");

  const KeyDomain domain = build_key_domain(keys_r, keys_s);

  std::vector<std::int64_t> groups(group_s.begin(), group_s.end());
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  std::unordered_map<std::int64_t, index_t> group_pos;
  group_pos.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) group_pos.emplace(groups[g], static_cast<index_t>(g));

  const SparseCsr mat_r = key_matrix(keys_r, domain, KeyOrientation::RowsByDomain, vals_r);

  // Key-domain-to-group matrix; duplicate (key, group) pairs in S keep their
  // join multiplicity by summing.
  std::vector<Triplet> trips;
  trips.reserve(keys_s.size());
  for (std::size_t t = 0; t < keys_s.size(); ++t)
    trips.push_back({domain.position(keys_s[t]), group_pos.at(group_s[t]), 1.0});
  const SparseCsr key_to_group =
      csr_from_triplets(domain.size(), static_cast<index_t>(groups.size()), trips);

  const SparseCsr per_row = spmm(mat_r, key_to_group);

  // Ones reduction vector: summation collapses the R rows.
  std::vector<double> sums(groups.size(), 0.0);
  for (index_t e = 0; e < per_row.nnz(); ++e) sums[per_row.col_idx[e]] += per_row.values[e];

  std::vector<GroupSum> out;
  out.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) out.push_back({groups[g], sums[g]});
  return out;
}

std::vector<TupleSum> groupby_sum_multi(std::span<const IntColumn> group_cols,
                                        std::span<const double> vals) {
  if (group_cols.empty()) throw ShapeError("groupby_sum_multi: no group columns");
  const std::size_t n = vals.size();
  for (const IntColumn& col : group_cols)
    if (col.size() != n) throw ShapeError("groupby_sum_multi: column length mismatch");

  std::vector<index_t> order(n);
  std::iota(order.begin(), order.end(), index_t{0});
  std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
    for (const IntColumn& col : group_cols) {
      if (col[a] != col[b]) return col[a] < col[b];
    }
    return a < b;  // deterministic accumulation order within a group
  });

  std::vector<TupleSum> out;
  std::size_t i = 0;
  while (i < n) {
    const index_t head = order[i];
    TupleSum ts;
    ts.group.reserve(group_cols.size());
    for (const IntColumn& col : group_cols) ts.group.push_back(col[head]);
    double sum = 0.0;
    while (i < n) {
      const index_t row = order[i];
      bool same = true;
      for (std::size_t c = 0; c < group_cols.size(); ++c)
        if (group_cols[c][row] != ts.group[c]) {
          same = false;
          break;
        }
      if (!same) break;
      sum += vals[row];
      ++i;
    }
    ts.sum = sum;
    out.push_back(std::move(ts));
  }
  return out;
}

DenseMat sort_rows(const DenseMat& t, std::span<const index_t> key_cols,
                   std::span<const SortDir> directions) {
  if (key_cols.size() != directions.size()) throw ShapeError("sort_rows: key/direction counts");
  for (index_t c : key_cols)
    if (c < 0 || c >= t.cols()) throw IndexError("sort_rows: key column " + std::to_string(c));

  std::vector<index_t> order(static_cast<std::size_t>(t.rows()));
  std::iota(order.begin(), order.end(), index_t{0});
  std::stable_sort(order.begin(), order.end(), [&](index_t a, index_t b) {
    for (std::size_t k = 0; k < key_cols.size(); ++k) {
      const double va = t(a, key_cols[k]);
      const double vb = t(b, key_cols[k]);
      if (va != vb) return directions[k] == SortDir::Asc ? va < vb : va > vb;
    }
    return false;
  });

  DenseMat out(t.rows(), t.cols());
  for (index_t r = 0; r < t.rows(); ++r)
    std::copy(t.row(order[r]), t.row(order[r]) + t.cols(), out.row(r));
  return out;
}

}  // namespace laq::ops
