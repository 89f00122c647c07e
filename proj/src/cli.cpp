#include "laq/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "laq/rng.hpp"

namespace laq::cli {

namespace {

using clock_t_ = std::chrono::steady_clock;

double now_s() { return std::chrono::duration<double>(clock_t_::now().time_since_epoch()).count(); }

class ScopeTimer {
 public:
  explicit ScopeTimer(double& sink) : sink_(sink), start_(now_s()) {}
  ~ScopeTimer() { sink_ += now_s() - start_; }

 private:
  double& sink_;
  double start_;
};

Table filter_table(const Table& t, const std::vector<const bench::FilterSpec*>& filters) {
  if (filters.empty()) return t;
  ops::SelectionMask mask;
  mask.bits.assign(static_cast<std::size_t>(t.row_count()), true);
  for (const bench::FilterSpec* f : filters) {
    const index_t col = t.schema().index_of(f->column);
    const ops::SelectionMask m = t.schema().kind(col) == ColKind::Float
                                     ? ops::build_selection_mask(t.floats(col), f->pred)
                                     : ops::build_selection_mask(t.ints(col), f->pred);
    mask = ops::mask_and(mask, m);
  }
  return ops::apply_mask(t, mask);
}

std::vector<const bench::FilterSpec*> filters_for(const bench::QuerySpec& q, int target) {
  std::vector<const bench::FilterSpec*> out;
  for (const bench::FilterSpec& f : q.filters)
    if (f.target == target) out.push_back(&f);
  return out;
}

SparseCsr fact_row_map(std::span<const index_t> survivors, index_t fact_rows) {
  SparseCsr m;
  m.rows = static_cast<index_t>(survivors.size());
  m.cols = fact_rows;
  m.row_ptr.resize(survivors.size() + 1);
  m.col_idx.assign(survivors.begin(), survivors.end());
  m.values.assign(survivors.size(), 1.0);
  std::iota(m.row_ptr.begin(), m.row_ptr.end(), index_t{0});
  return m;
}

IntColumn column_to_ints(const DenseMat& col_mat) {
  IntColumn out(static_cast<std::size_t>(col_mat.rows()));
  for (index_t i = 0; i < col_mat.rows(); ++i) out[i] = std::llround(col_mat(i, 0));
  return out;
}

}  // namespace

DenseMat run_query_laq(const StarSchema& data, const bench::QuerySpec& q, StageTimes* stages) {
  StageTimes local;
  StageTimes& st = stages ? *stages : local;

  Table fact;
  std::vector<Table> link_dims;
  {
    ScopeTimer t(st.construct);
    fact = filter_table(data.fact(), filters_for(q, -1));
    link_dims.reserve(q.joins.size());
    for (std::size_t j = 0; j < q.joins.size(); ++j)
      link_dims.push_back(
          filter_table(data.dim(q.joins[j].dim_name), filters_for(q, static_cast<int>(j))));
  }

  std::vector<ops::DimJoinSpec> specs;
  specs.reserve(q.joins.size());
  for (std::size_t j = 0; j < q.joins.size(); ++j)
    specs.push_back({&link_dims[j], q.joins[j].fact_fk, q.joins[j].dim_pk});

  ops::JoinStageTimes jt;
  std::vector<index_t> survivors;
  const std::vector<ops::RowMatch> matches = ops::multiway_star_join(fact, specs, &survivors, &jt);
  st.add_join(jt);

  ScopeTimer t(st.materialize);
  const SparseCsr i_fact = fact_row_map(survivors, fact.row_count());
  const std::vector<std::string> measure_cols{q.measure};
  const DenseMat vals_mat = spmm_dense(i_fact, to_matrix(fact, measure_cols));

  if (q.group_by.empty()) {
    // Plain sum: reduce with a ones vector.
    DenseMat ones(1, vals_mat.rows(), std::vector<double>(static_cast<std::size_t>(vals_mat.rows()), 1.0));
    return dense_matmul(ones, vals_mat);
  }

  std::vector<double> vals(vals_mat.data());
  std::vector<IntColumn> group_cols;
  group_cols.reserve(q.group_by.size());
  for (const bench::GroupRef& g : q.group_by) {
    const std::vector<std::string> cols{g.column};
    if (g.target == -1) {
      group_cols.push_back(column_to_ints(spmm_dense(i_fact, to_matrix(fact, cols))));
    } else {
      const SparseCsr i_dim = csr_from_coo(matches[g.target].mat);
      group_cols.push_back(column_to_ints(spmm_dense(i_dim, to_matrix(link_dims[g.target], cols))));
    }
  }

  const std::vector<ops::TupleSum> agg = ops::groupby_sum_multi(group_cols, vals);

  DenseMat result(static_cast<index_t>(agg.size()), static_cast<index_t>(q.group_by.size()) + 1);
  for (std::size_t r = 0; r < agg.size(); ++r) {
    for (std::size_t c = 0; c < agg[r].group.size(); ++c)
      result(static_cast<index_t>(r), static_cast<index_t>(c)) = static_cast<double>(agg[r].group[c]);
    result(static_cast<index_t>(r), static_cast<index_t>(q.group_by.size())) = agg[r].sum;
  }

  if (q.order_by) {
    std::vector<index_t> keys(q.group_by.size());
    std::iota(keys.begin(), keys.end(), index_t{0});
    const std::vector<ops::SortDir> dirs(q.group_by.size(), ops::SortDir::Asc);
    result = ops::sort_rows(result, keys, dirs);
  }
  return result;
}

DenseMat run_query_oracle(const StarSchema& data, const bench::QuerySpec& q, StageTimes* stages) {
  StageTimes local;
  StageTimes& st = stages ? *stages : local;

  // Scalar filtering; no LA-engine code on this path.
  Table fact;
  std::vector<Table> link_dims;
  {
    ScopeTimer t(st.construct);
    const auto scalar_filter = [](const Table& table, const std::vector<const bench::FilterSpec*>& fs) {
      if (fs.empty()) return table;
      std::vector<Column> cols(static_cast<std::size_t>(table.col_count()));
      std::vector<char> keep(static_cast<std::size_t>(table.row_count()), 1);
      for (const bench::FilterSpec* f : fs) {
        const index_t c = table.schema().index_of(f->column);
        for (index_t r = 0; r < table.row_count(); ++r) {
          if (!keep[r]) continue;
          const bool ok = table.schema().kind(c) == ColKind::Float
                              ? f->pred.matches(table.floats(c)[r])
                              : f->pred.matches(table.ints(c)[r]);
          if (!ok) keep[r] = 0;
        }
      }
      for (index_t c = 0; c < table.col_count(); ++c) {
        if (std::holds_alternative<IntColumn>(table.column(c))) {
          IntColumn dst;
          const IntColumn& src = std::get<IntColumn>(table.column(c));
          for (std::size_t r = 0; r < src.size(); ++r)
            if (keep[r]) dst.push_back(src[r]);
          cols[c] = std::move(dst);
        } else {
          FloatColumn dst;
          const FloatColumn& src = std::get<FloatColumn>(table.column(c));
          for (std::size_t r = 0; r < src.size(); ++r)
            if (keep[r]) dst.push_back(src[r]);
          cols[c] = std::move(dst);
        }
      }
      return Table(table.schema(), std::move(cols));
    };
    fact = scalar_filter(data.fact(), filters_for(q, -1));
    link_dims.reserve(q.joins.size());
    for (std::size_t j = 0; j < q.joins.size(); ++j)
      link_dims.push_back(scalar_filter(data.dim(q.joins[j].dim_name),
                                        filters_for(q, static_cast<int>(j))));
  }

  oracle::StarMatch match;
  std::vector<double> vals;
  {
    ScopeTimer t(st.materialize);
    std::vector<oracle::DimRef> refs;
    refs.reserve(q.joins.size());
    for (std::size_t j = 0; j < q.joins.size(); ++j)
      refs.push_back({&link_dims[j], q.joins[j].fact_fk, q.joins[j].dim_pk});
    match = oracle::star_join(fact, refs);

    const IntColumn& measure = fact.ints(q.measure);
    vals.reserve(match.fact_rows.size());
    for (index_t row : match.fact_rows) vals.push_back(static_cast<double>(measure[row]));
  }

  ScopeTimer t(st.predict);
  if (q.group_by.empty()) {
    double sum = 0;
    for (double v : vals) sum += v;
    return DenseMat(1, 1, {sum});
  }

  std::vector<IntColumn> group_cols;
  group_cols.reserve(q.group_by.size());
  for (const bench::GroupRef& g : q.group_by) {
    IntColumn col;
    col.reserve(match.fact_rows.size());
    if (g.target == -1) {
      const IntColumn& src = fact.ints(g.column);
      for (index_t row : match.fact_rows) col.push_back(src[row]);
    } else {
      const IntColumn& src = link_dims[g.target].ints(g.column);
      for (index_t row : match.dim_rows[g.target]) col.push_back(src[row]);
    }
    group_cols.push_back(std::move(col));
  }

  const std::vector<oracle::GroupRow> agg = oracle::hash_aggregate(group_cols, vals);
  DenseMat result(static_cast<index_t>(agg.size()), static_cast<index_t>(q.group_by.size()) + 1);
  for (std::size_t r = 0; r < agg.size(); ++r) {
    for (std::size_t c = 0; c < agg[r].keys.size(); ++c)
      result(static_cast<index_t>(r), static_cast<index_t>(c)) = static_cast<double>(agg[r].keys[c]);
    result(static_cast<index_t>(r), static_cast<index_t>(q.group_by.size())) = agg[r].sum;
  }
  return result;  // std::map iteration already yields ascending group order
}

// ---------------------------------------------------------------------------
// PipelineRunner
// ---------------------------------------------------------------------------

std::uint64_t PipelineResult::checksum() const {
  return labels.empty() ? checksum_rows(values) : checksum_labels(labels);
}

index_t PipelineResult::row_count() const {
  return labels.empty() ? values.rows() : static_cast<index_t>(labels.size());
}

PipelineRunner::PipelineRunner(const StarSchema& data, const ml::TreeModel* tree,
                               const ml::LinearOperator* linear, std::int64_t max_bytes)
    : data_(&data),
      tree_(tree),
      linear_(linear),
      layout_(bench::feature_layout(data)),
      max_bytes_(max_bytes) {
  if ((tree_ != nullptr) == (linear_ != nullptr))
    throw ShapeError("pipeline: exactly one of tree/linear model required");

  for (std::size_t d = 0; d < layout_.dim_names.size(); ++d) {
    const Table& dim = data.dim(layout_.dim_names[d]);
    dim_mats_.push_back(to_matrix(dim, layout_.dim_feature_cols[d]));
    std::vector<std::pair<index_t, index_t>> mapping;
    for (index_t f = 0; f < static_cast<index_t>(layout_.dim_feature_cols[d].size()); ++f)
      mapping.emplace_back(f, layout_.offsets[d] + f);
    placements_.push_back(
        ops::build_placement_map(static_cast<index_t>(mapping.size()), layout_.total, mapping));
  }
  join_specs_ = {{&data.dim("part"), "lo_part", "p_key"},
                 {&data.dim("supplier"), "lo_supplier", "s_key"},
                 {&data.dim("date"), "lo_orderdate", "d_key"}};

  if (tree_) {
    tree_la_ = ml::compile_tree(*tree_, layout_.total);
    tree_parts_ = fusion::partition_tree(tree_la_, layout_.feature_owner,
                                         static_cast<index_t>(layout_.dim_names.size()));
  } else if (linear_->mat.rows() != layout_.total) {
    throw ShapeError("pipeline: operator input width " + std::to_string(linear_->mat.rows()) +
                     " does not match feature width " + std::to_string(layout_.total));
  }
}

void PipelineRunner::prepare_joins(StageTimes& st) {
  if (joined_) return;
  ops::JoinStageTimes jt;
  const std::vector<ops::RowMatch> matches =
      ops::multiway_star_join(data_->fact(), join_specs_, nullptr, &jt);
  st.add_join(jt);
  {
    ScopeTimer t(st.construct);
    i_csr_.clear();
    i_csr_.reserve(matches.size());
    for (const ops::RowMatch& m : matches) i_csr_.push_back(csr_from_coo(m.mat));
  }
  target_rows_ = matches.empty() ? 0 : matches[0].nnz();
  joined_ = true;
}

void PipelineRunner::prefuse(StageTimes& st) {
  if (fused_linear_ || fused_tree_) return;
  const index_t out_width = linear_ ? linear_->mat.cols() : tree_la_.leaf_count();
  std::int64_t partial_cells = 0;
  for (const DenseMat& dim : dim_mats_) partial_cells += dim.rows() * out_width;
  if (max_bytes_ > 0 && partial_cells * 8 > max_bytes_)
    throw CapacityError("pre-fused partials need " + std::to_string(partial_cells * 8) +
                        " bytes, cap is " + std::to_string(max_bytes_));
  ScopeTimer t(st.prefuse);
  if (linear_)
    fused_linear_ = fusion::prefuse_linear(dim_mats_, placements_, *linear_);
  else
    fused_tree_ = fusion::prefuse_tree(dim_mats_, placements_, tree_parts_, tree_la_.path_score,
                                       tree_la_.labels);
}

void PipelineRunner::invalidate_prefuse() {
  fused_linear_.reset();
  fused_tree_.reset();
}

PipelineResult PipelineRunner::run_nonfused(StageTimes& st) {
  prepare_joins(st);
  if (max_bytes_ > 0 && target_rows_ * layout_.total * 8 > max_bytes_)
    throw CapacityError("materialized target needs " +
                        std::to_string(target_rows_ * layout_.total * 8) + " bytes, cap is " +
                        std::to_string(max_bytes_));
  PipelineResult out;
  DenseMat target;
  {
    ScopeTimer t(st.materialize);
    target = ops::materialize(i_csr_, dim_mats_, placements_);
  }
  ScopeTimer t(st.predict);
  if (linear_)
    out.values = ml::predict_linear(target, *linear_);
  else
    out.labels = ml::predict_tree(target, tree_la_);
  return out;
}

PipelineResult PipelineRunner::run_fused(StageTimes& st) {
  prepare_joins(st);
  prefuse(st);
  PipelineResult out;
  ScopeTimer t(st.predict);
  if (linear_)
    out.values = fusion::apply_fused_linear(i_csr_, *fused_linear_);
  else
    out.labels = fusion::apply_fused_tree(i_csr_, *fused_tree_);
  return out;
}

PipelineResult PipelineRunner::run_oracle(StageTimes& st) {
  std::vector<oracle::DimRef> refs;
  for (const ops::DimJoinSpec& spec : join_specs_)
    refs.push_back({spec.dim, spec.fk_col, spec.pk_col});

  // Linear prediction happens below so it lands in the predict bucket; the
  // tree walk is part of star_pipeline and counts as materialize+predict.
  oracle::PipelineOutput raw;
  {
    ScopeTimer t(st.materialize);
    raw = oracle::star_pipeline(data_->fact(), refs, layout_.dim_feature_cols,
                                tree_ ? tree_ : nullptr, nullptr);
  }
  PipelineResult out;
  if (tree_) {
    out.labels = std::move(raw.labels);
    return out;
  }
  ScopeTimer t(st.predict);
  const DenseMat& features = raw.values;
  const DenseMat& w = linear_->mat;
  DenseMat pred(features.rows(), w.cols());
  for (index_t m = 0; m < features.rows(); ++m)
    for (index_t c = 0; c < w.cols(); ++c) {
      double dot = 0;
      for (index_t f = 0; f < features.cols(); ++f) dot += features(m, f) * w(f, c);
      pred(m, c) = dot;
    }
  out.values = std::move(pred);
  return out;
}

// ---------------------------------------------------------------------------
// Dataset files
// ---------------------------------------------------------------------------

namespace {

std::uint64_t file_fnv(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h = fnv1a({buf, static_cast<std::size_t>(in.gcount())}, h);
  }
  return h;
}

nlohmann::json schema_json(const Schema& s) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& [name, kind] : s.columns)
    cols.push_back(nlohmann::json::array({name, std::string(col_kind_name(kind))}));
  return cols;
}

Schema schema_from_json(const nlohmann::json& j) {
  Schema s;
  for (const auto& col : j)
    s.columns.emplace_back(col.at(0).get<std::string>(),
                           col_kind_from_name(col.at(1).get<std::string>()));
  return s;
}

std::string setting_name(bench::Setting s) {
  switch (s) {
    case bench::Setting::S1: return "1";
    case bench::Setting::S2: return "2";
    case bench::Setting::Ssb: return "ssb";
  }
  return "?";
}

bench::Setting setting_from_name(std::string_view s) {
  if (s == "1") return bench::Setting::S1;
  if (s == "2") return bench::Setting::S2;
  if (s == "ssb") return bench::Setting::Ssb;
  throw FormatError("unknown setting: " + std::string(s));
}

}  // namespace

void write_dataset(const StarSchema& data, const bench::GenConfig& cfg,
                   const std::optional<ModelSpec>& models, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  nlohmann::json manifest;
  manifest["generator"] = {{"setting", setting_name(cfg.setting)},
                           {"sf", cfg.sf},
                           {"seed", cfg.seed},
                           {"features", cfg.feature_width},
                           {"dangling", cfg.dangling_fraction},
                           {"max_bytes", cfg.max_bytes}};

  nlohmann::json tables = nlohmann::json::array();
  const auto emit = [&](const std::string& name, const Table& t, const char* role) {
    const std::filesystem::path file = dir / (name + ".csv");
    save_csv(t, file);
    tables.push_back({{"name", name},
                      {"role", role},
                      {"rows", t.row_count()},
                      {"file", name + ".csv"},
                      {"schema", schema_json(t.schema())},
                      {"fnv64", file_fnv(file)}});
  };
  emit("lineorder", data.fact(), "fact");
  for (const auto& [name, dim] : data.dims()) emit(name, dim, "dim");
  manifest["tables"] = std::move(tables);

  nlohmann::json links = nlohmann::json::array();
  for (const StarLink& link : data.links())
    links.push_back(nlohmann::json::array({link.fact_fk, link.dim_name, link.dim_pk}));
  manifest["links"] = std::move(links);

  nlohmann::json model_list = nlohmann::json::array();
  if (models && cfg.feature_width > 0) {
    const bench::FeatureLayout layout = bench::feature_layout(data);
    const index_t p = models->tree_features > 0 ? models->tree_features : layout.total;
    const ml::TreeModel tree = bench::gen_tree(layout.total, p, models->tree_leaves, models->seed);
    ml::save_tree(tree, dir / "model_tree.txt");
    model_list.push_back({{"kind", "tree"}, {"file", "model_tree.txt"}});
    const ml::LinearOperator lin = bench::gen_linear(layout.total, models->linear_out, models->seed);
    ml::save_linear(lin, dir / "model_linear.txt");
    model_list.push_back({{"kind", "linear"}, {"file", "model_linear.txt"}});
  }
  manifest["models"] = std::move(model_list);

  std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << "\n";
}

LoadedDataset load_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw FormatError("cannot open " + (dir / "manifest.json").string());
  nlohmann::json manifest;
  in >> manifest;

  const auto& g = manifest.at("generator");
  bench::GenConfig cfg;
  cfg.setting = setting_from_name(g.at("setting").get<std::string>());
  cfg.sf = g.at("sf").get<std::int64_t>();
  cfg.seed = g.at("seed").get<std::uint64_t>();
  cfg.feature_width = g.at("features").get<index_t>();
  cfg.dangling_fraction = g.at("dangling").get<double>();
  cfg.max_bytes = g.at("max_bytes").get<std::int64_t>();

  Table fact;
  std::vector<std::pair<std::string, Table>> dims;
  for (const auto& tj : manifest.at("tables")) {
    const Schema schema = schema_from_json(tj.at("schema"));
    Table t = load_csv(dir / tj.at("file").get<std::string>(), schema);
    if (tj.at("role").get<std::string>() == "fact")
      fact = std::move(t);
    else
      dims.emplace_back(tj.at("name").get<std::string>(), std::move(t));
  }

  std::vector<StarLink> links;
  for (const auto& lj : manifest.at("links"))
    links.push_back({lj.at(0).get<std::string>(), lj.at(1).get<std::string>(),
                     lj.at(2).get<std::string>()});

  LoadedDataset out{StarSchema(std::move(fact), std::move(dims), std::move(links)), cfg, dir, {}};
  for (const auto& mj : manifest.at("models"))
    out.models.emplace_back(mj.at("kind").get<std::string>(),
                            dir / mj.at("file").get<std::string>());
  return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_gen(const GenOptions& opt) {
  const StarSchema data = bench::gen_star(opt.cfg);
  write_dataset(data, opt.cfg, opt.models, opt.out_dir);
  std::cout << "wrote dataset to " << opt.out_dir.string() << " (fact rows "
            << data.fact().row_count() << ")\n";
  return kExitOk;
}

namespace {

bench::QuerySpec find_query(const StarSchema& data, const std::string& id,
                            std::span<const double> targets) {
  if (id.size() != 2 || id[0] < '1' || id[0] > '4')
    throw Error("unknown query id '" + id + "' (expected 11..43)");
  const auto group = static_cast<bench::QueryGroup>(id[0] - '0');
  for (bench::QuerySpec& q : bench::gen_queries(data, group, targets))
    if (q.id == id) return std::move(q);
  throw Error("unknown query id '" + id + "'");
}

}  // namespace

int cmd_query(const QueryOptions& opt, RunReport* report) {
  if (opt.engine != "laq" && opt.engine != "oracle") {
    std::cerr << "query: engine must be laq or oracle\n";
    return kExitUsage;
  }
  if (opt.repeats < 1) {
    std::cerr << "query: repeats must be >= 1\n";
    return kExitUsage;
  }

  LoadedDataset ds = load_dataset(opt.dataset);
  bench::QuerySpec q;
  try {
    q = find_query(ds.data, opt.query_id, opt.selectivity_targets);
  } catch (const Error& e) {
    std::cerr << "query: " << e.what() << "\n";
    return kExitUsage;
  }

  if (opt.verify) {
    const DenseMat lhs = run_query_laq(ds.data, q);
    const DenseMat rhs = run_query_oracle(ds.data, q);
    const CompareResult cmp = compare_matrices(lhs, rhs, 1e-9);
    if (!cmp.ok) {
      std::cerr << "verification FAILED for query " << q.id << ": " << cmp.diff << "\n";
      return kExitVerify;
    }
    std::cout << "verify ok: laq matches oracle (" << lhs.rows() << " rows)\n";
  }

  RunRecord rec;
  rec.mode = opt.engine;
  rec.item = q.id;
  rec.repetitions = opt.repeats;

  const auto run_once = [&](StageTimes& st) {
    return opt.engine == "laq" ? run_query_laq(ds.data, q, &st) : run_query_oracle(ds.data, q, &st);
  };

  StageTimes warm_st;
  DenseMat result = run_once(warm_st);  // warm-up, excluded from statistics

  std::vector<double> walls;
  walls.reserve(opt.repeats);
  for (int r = 0; r < opt.repeats; ++r) {
    const double t0 = now_s();
    result = run_once(rec.stages);
    walls.push_back(now_s() - t0);
  }
  rec.total_s = 0;
  for (double w : walls) rec.total_s += w;
  std::tie(rec.mean_s, rec.stderr_s) = mean_stderr(walls);
  rec.checksum = checksum_rows(result);
  rec.result_rows = result.rows();

  std::cout << "query " << q.id << " engine=" << opt.engine << " rows=" << rec.result_rows
            << " selectivity=" << q.realized_selectivity << " mean=" << rec.mean_s
            << "s stderr=" << rec.stderr_s << "s checksum=" << rec.checksum << "\n";

  if (report) report->records.push_back(rec);
  if (!opt.out.empty()) {
    RunReport file_report;
    file_report.records.push_back(rec);
    file_report.write(opt.out);
  }
  return kExitOk;
}

int cmd_pipeline(const PipelineOptions& opt, RunReport* report) {
  if (opt.mode != "fused" && opt.mode != "nonfused" && opt.mode != "oracle") {
    std::cerr << "pipeline: mode must be fused, nonfused or oracle\n";
    return kExitUsage;
  }
  if (opt.repeats < 1) {
    std::cerr << "pipeline: repeats must be >= 1\n";
    return kExitUsage;
  }

  LoadedDataset ds = load_dataset(opt.dataset);
  std::filesystem::path model_path = opt.model;
  if (!std::filesystem::exists(model_path) && std::filesystem::exists(ds.dir / model_path))
    model_path = ds.dir / model_path;

  // Model files are self-describing: trees are N/L records, linear operators
  // start with a LINEAR header.
  std::optional<ml::TreeModel> tree;
  std::optional<ml::LinearOperator> linear;
  {
    std::ifstream probe(model_path);
    if (!probe) throw FormatError("cannot open model " + model_path.string());
    std::string tag;
    probe >> tag;
    if (tag == "LINEAR")
      linear = ml::load_linear(model_path);
    else
      tree = ml::load_tree(model_path);
  }

  PipelineRunner runner(ds.data, tree ? &*tree : nullptr, linear ? &*linear : nullptr,
                        ds.cfg.max_bytes);

  RunRecord rec;
  rec.mode = opt.mode == "fused" ? "laq-fused" : (opt.mode == "nonfused" ? "laq" : "oracle");
  rec.item = model_path.stem().string();
  rec.repetitions = opt.repeats;

  const auto run_once = [&](StageTimes& st) {
    if (opt.mode == "fused") return runner.run_fused(st);
    if (opt.mode == "nonfused") return runner.run_nonfused(st);
    return runner.run_oracle(st);
  };

  // One-time phases are timed into the record's stages and total.
  double setup_wall = 0;
  if (opt.mode != "oracle") {
    const double t0 = now_s();
    runner.prepare_joins(rec.stages);
    if (opt.mode == "fused") runner.prefuse(rec.stages);
    setup_wall = now_s() - t0;
  }

  if (opt.verify) {
    StageTimes scratch;
    const PipelineResult got = run_once(scratch);
    const PipelineResult want = runner.run_oracle(scratch);
    const CompareResult cmp = got.labels.empty()
                                  ? compare_matrices(got.values, want.values, 1e-9)
                                  : compare_labels(got.labels, want.labels);
    if (!cmp.ok) {
      std::cerr << "verification FAILED for pipeline (" << opt.mode << "): " << cmp.diff << "\n";
      return kExitVerify;
    }
    std::cout << "verify ok: " << opt.mode << " matches oracle (" << got.row_count() << " rows)\n";
  }

  {
    StageTimes scratch;
    run_once(scratch);  // warm-up, excluded
  }

  std::vector<double> walls;
  walls.reserve(opt.repeats);
  PipelineResult result;
  for (int r = 0; r < opt.repeats; ++r) {
    const double t0 = now_s();
    result = run_once(rec.stages);
    walls.push_back(now_s() - t0);
  }
  rec.total_s = setup_wall;
  for (double w : walls) rec.total_s += w;
  std::tie(rec.mean_s, rec.stderr_s) = mean_stderr(walls);
  rec.checksum = result.checksum();
  rec.result_rows = result.row_count();

  std::cout << "pipeline mode=" << opt.mode << " model=" << rec.item
            << " rows=" << rec.result_rows << " mean=" << rec.mean_s << "s stderr=" << rec.stderr_s
            << "s prefuse=" << rec.stages.prefuse << "s checksum=" << rec.checksum << "\n";

  if (report) report->records.push_back(rec);
  if (!opt.out.empty()) {
    RunReport file_report;
    file_report.records.push_back(rec);
    file_report.write(opt.out);
  }
  return kExitOk;
}

int cmd_cost(const CostOptions& opt) {
  if (opt.kind != "linear" && opt.kind != "tree") {
    std::cerr << "cost: kind must be linear or tree\n";
    return kExitUsage;
  }
  const double ratio = opt.kind == "linear" ? fusion::speedup_ratio_linear(opt.inputs)
                                            : fusion::speedup_ratio_tree(opt.inputs);
  const double leading = static_cast<double>(opt.inputs.input_width) /
                         static_cast<double>(opt.inputs.output_width);
  const bool fuse = fusion::decide_fusion(ratio, opt.threshold);
  std::cout << "kind=" << opt.kind << " ratio=" << ratio << " leading_term=" << leading
            << " decision=" << (fuse ? "fuse" : "no-fuse") << "\n";

  if (!opt.sweep_out.empty()) {
    std::string csv = "kind,k,l,ratio,fuse\n";
    for (index_t ke = 4; ke <= 11; ++ke) {
      for (index_t le = 1; le <= 11; ++le) {
        fusion::CostInputs c = opt.inputs;
        c.input_width = index_t{1} << ke;
        c.output_width = index_t{1} << le;
        c.tree_features = c.input_width;
        const double r = opt.kind == "linear" ? fusion::speedup_ratio_linear(c)
                                              : fusion::speedup_ratio_tree(c);
        csv += opt.kind + "," + std::to_string(c.input_width) + "," +
               std::to_string(c.output_width) + "," + std::to_string(r) + "," +
               (fusion::decide_fusion(r, opt.threshold) ? "1" : "0") + "\n";
      }
    }
    std::ofstream(opt.sweep_out, std::ios::binary) << csv;
    std::cout << "wrote sweep to " << opt.sweep_out.string() << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Config files
// ---------------------------------------------------------------------------

void apply_gen_kv(GenOptions& opt, std::string_view key, std::string_view value) {
  const std::string v(value);
  if (key == "setting") {
    opt.cfg.setting = setting_from_name(v);
  } else if (key == "sf") {
    opt.cfg.sf = std::stoll(v);
  } else if (key == "seed") {
    opt.cfg.seed = std::stoull(v);
  } else if (key == "features") {
    opt.cfg.feature_width = std::stoll(v);
  } else if (key == "dangling") {
    opt.cfg.dangling_fraction = std::stod(v);
  } else if (key == "max_bytes") {
    opt.cfg.max_bytes = std::stoll(v);
  } else if (key == "out") {
    opt.out_dir = v;
  } else if (key == "tree_leaves") {
    if (!opt.models) opt.models.emplace();
    opt.models->tree_leaves = std::stoll(v);
  } else if (key == "tree_features") {
    if (!opt.models) opt.models.emplace();
    opt.models->tree_features = std::stoll(v);
  } else if (key == "linear_out") {
    if (!opt.models) opt.models.emplace();
    opt.models->linear_out = std::stoll(v);
  } else if (key == "model_seed") {
    if (!opt.models) opt.models.emplace();
    opt.models->seed = std::stoull(v);
  } else {
    throw FormatError("unknown config key: " + std::string(key));
  }
}

GenOptions parse_gen_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open config " + file.string());
  GenOptions opt;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw FormatError("config line " + std::to_string(line_no) + ": expected key=value");
    apply_gen_kv(opt, std::string_view(line).substr(0, eq), std::string_view(line).substr(eq + 1));
  }
  return opt;
}

}  // namespace laq::cli
