#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "laq/laqops.hpp"
#include "laq/matrix.hpp"

namespace laq::cli {

// Per-stage wall clock (seconds) accumulated across the measured repetitions
// of one run. Stages are non-overlapping; prefuse is charged once per run,
// not per repetition.
struct StageTimes {
  double domain_gen = 0;
  double construct = 0;
  double spmm = 0;
  double materialize = 0;
  double predict = 0;
  double prefuse = 0;

  double sum() const { return domain_gen + construct + spmm + materialize + predict + prefuse; }

  void add_join(const ops::JoinStageTimes& jt) {
    domain_gen += jt.domain_gen;
    construct += jt.construct;
    spmm += jt.spmm;
  }
};

struct RunRecord {
  std::string mode;  // laq | laq-fused | oracle
  std::string item;  // query id or model id
  int repetitions = 0;
  double mean_s = 0;
  double stderr_s = 0;
  double total_s = 0;  // sum of measured repetition walls (+ prefuse)
  StageTimes stages;
  std::uint64_t checksum = 0;
  index_t result_rows = 0;
};

struct RunReport {
  std::vector<RunRecord> records;

  static const char* csv_header();
  std::string to_csv() const;
  std::string to_json() const;
  // Writes <stem>.csv and its JSON mirror <stem>.json.
  void write(const std::filesystem::path& out) const;
};

// Mean and standard error over repetition walls.
std::pair<double, double> mean_stderr(std::span<const double> samples);

// Order-independent multiset hash over result rows. Values are canonicalized
// to 12 significant digits so both engines of a verified pair agree.
std::uint64_t checksum_rows(const DenseMat& m);
std::uint64_t checksum_labels(std::span<const std::int64_t> labels);

struct CompareResult {
  bool ok = true;
  std::string diff;
};

// Element-wise comparison at a relative tolerance (exact when tol == 0).
CompareResult compare_matrices(const DenseMat& a, const DenseMat& b, double rel_tol);
CompareResult compare_labels(std::span<const std::int64_t> a, std::span<const std::int64_t> b);

}  // namespace laq::cli
