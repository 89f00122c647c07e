#pragma once

#include <memory>
#include <optional>

#include "laq/benchgen.hpp"
#include "laq/fusion.hpp"
#include "laq/oracle.hpp"
#include "laq/report.hpp"

namespace laq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitVerify = 3;
inline constexpr int kExitCapacity = 4;

// ---------------------------------------------------------------------------
// Query execution (LA engine and oracle)
// ---------------------------------------------------------------------------

// Runs a workload query through the LA operators: masked filters, multi-way
// MM-join, matrix gathers and sort-unique aggregation. Result rows are
// [group columns..., sum] in ascending group order (a plain Sum yields 1x1).
DenseMat run_query_laq(const StarSchema& data, const bench::QuerySpec& q,
                       StageTimes* stages = nullptr);

// Same query through scalar filters, hash joins and hash aggregation.
DenseMat run_query_oracle(const StarSchema& data, const bench::QuerySpec& q,
                          StageTimes* stages = nullptr);

// ---------------------------------------------------------------------------
// Predictive pipeline execution
// ---------------------------------------------------------------------------

struct PipelineResult {
  DenseMat values;                  // linear predictions (empty for trees)
  std::vector<std::int64_t> labels;  // tree predictions (empty for linear)

  std::uint64_t checksum() const;
  index_t row_count() const;
};

// Star join of the canonical three dimensions followed by model prediction.
// The join products (row mapping matrices) and the pre-fused partials depend
// only on the dataset and model, so they are computed once, timed into their
// own stage buckets, and reused across repetitions; each measured repetition
// then covers the prediction path (materialize+predict, or fused apply).
class PipelineRunner {
 public:
  // max_bytes > 0 bounds the materialized target and the pre-fused partials
  // (CapacityError when exceeded); 0 disables the guard.
  PipelineRunner(const StarSchema& data, const ml::TreeModel* tree,
                 const ml::LinearOperator* linear, std::int64_t max_bytes = 0);

  // One-time phases; idempotent unless invalidated.
  void prepare_joins(StageTimes& st);
  void prefuse(StageTimes& st);

  PipelineResult run_nonfused(StageTimes& st);
  PipelineResult run_fused(StageTimes& st);
  // Reference pipeline, re-evaluated from scratch on every call.
  PipelineResult run_oracle(StageTimes& st);

  // Drops the cached pre-fused partials, e.g. after a model swap.
  void invalidate_prefuse();

  const bench::FeatureLayout& layout() const { return layout_; }
  index_t target_rows() const { return target_rows_; }

 private:
  const StarSchema* data_;
  const ml::TreeModel* tree_;
  const ml::LinearOperator* linear_;
  bench::FeatureLayout layout_;
  std::vector<DenseMat> dim_mats_;
  std::vector<ops::ColumnMap> placements_;
  std::vector<ops::DimJoinSpec> join_specs_;
  ml::TreeLA tree_la_;
  std::vector<fusion::TreeDimBlock> tree_parts_;
  std::vector<SparseCsr> i_csr_;
  std::int64_t max_bytes_ = 0;
  index_t target_rows_ = 0;
  bool joined_ = false;
  std::optional<fusion::FusedLinear> fused_linear_;
  std::optional<fusion::FusedTree> fused_tree_;
};

// ---------------------------------------------------------------------------
// Datasets on disk
// ---------------------------------------------------------------------------

struct ModelSpec {
  index_t tree_leaves = 64;
  index_t tree_features = 0;  // 0: use the full feature width
  index_t linear_out = 2;
  std::uint64_t seed = 7;
};

void write_dataset(const StarSchema& data, const bench::GenConfig& cfg,
                   const std::optional<ModelSpec>& models, const std::filesystem::path& dir);

struct LoadedDataset {
  StarSchema data;
  bench::GenConfig cfg;
  std::filesystem::path dir;
  std::vector<std::pair<std::string, std::filesystem::path>> models;  // kind -> file
};

LoadedDataset load_dataset(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Commands (exit code per the CLI contract; reports optionally captured)
// ---------------------------------------------------------------------------

struct GenOptions {
  bench::GenConfig cfg;
  std::optional<ModelSpec> models;
  std::filesystem::path out_dir;
};

int cmd_gen(const GenOptions& opt);

struct QueryOptions {
  std::filesystem::path dataset;
  std::string query_id;
  std::string engine = "laq";  // laq | oracle
  int repeats = 10;
  bool verify = false;
  std::vector<double> selectivity_targets;
  std::filesystem::path out;  // empty: no report files
};

int cmd_query(const QueryOptions& opt, RunReport* report = nullptr);

struct PipelineOptions {
  std::filesystem::path dataset;
  std::filesystem::path model;
  std::string mode = "nonfused";  // fused | nonfused | oracle
  int repeats = 10;
  bool verify = false;
  std::filesystem::path out;
};

int cmd_pipeline(const PipelineOptions& opt, RunReport* report = nullptr);

struct CostOptions {
  fusion::CostInputs inputs;
  std::string kind = "linear";  // linear | tree
  double threshold = 1.0;
  std::filesystem::path sweep_out;  // non-empty: write a k x l ratio grid CSV
};

int cmd_cost(const CostOptions& opt);

// Key=value configuration files for the generator.
GenOptions parse_gen_config(const std::filesystem::path& file);
void apply_gen_kv(GenOptions& opt, std::string_view key, std::string_view value);

}  // namespace laq::cli
