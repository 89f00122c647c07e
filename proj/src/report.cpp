#include "laq/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "laq/rng.hpp"

namespace laq::cli {

const char* RunReport::csv_header() {
  return "mode,item,repetitions,mean_s,stderr_s,total_s,domain_gen_s,construct_s,spmm_s,"
         "materialize_s,predict_s,prefuse_s,checksum,result_rows";
}

namespace {

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

nlohmann::json record_json(const RunRecord& r) {
  return nlohmann::json{{"mode", r.mode},
                        {"item", r.item},
                        {"repetitions", r.repetitions},
                        {"mean_s", r.mean_s},
                        {"stderr_s", r.stderr_s},
                        {"total_s", r.total_s},
                        {"stages",
                         {{"domain_gen_s", r.stages.domain_gen},
                          {"construct_s", r.stages.construct},
                          {"spmm_s", r.stages.spmm},
                          {"materialize_s", r.stages.materialize},
                          {"predict_s", r.stages.predict},
                          {"prefuse_s", r.stages.prefuse}}},
                        {"checksum", r.checksum},
                        {"result_rows", r.result_rows}};
}

}  // namespace

std::string RunReport::to_csv() const {
  std::string out = csv_header();
  out.push_back('\n');
  for (const RunRecord& r : records) {
    out += r.mode + "," + r.item + "," + std::to_string(r.repetitions) + "," + fmt_g(r.mean_s) +
           "," + fmt_g(r.stderr_s) + "," + fmt_g(r.total_s) + "," + fmt_g(r.stages.domain_gen) +
           "," + fmt_g(r.stages.construct) + "," + fmt_g(r.stages.spmm) + "," +
           fmt_g(r.stages.materialize) + "," + fmt_g(r.stages.predict) + "," +
           fmt_g(r.stages.prefuse) + "," + std::to_string(r.checksum) + "," +
           std::to_string(r.result_rows) + "\n";
  }
  return out;
}

std::string RunReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const RunRecord& r : records) j.push_back(record_json(r));
  return j.dump(2) + "\n";
}

void RunReport::write(const std::filesystem::path& out) const {
  std::filesystem::path csv = out;
  std::filesystem::path json = out;
  if (out.extension() == ".json") {
    csv.replace_extension(".csv");
  } else {
    json.replace_extension(".json");
  }
  std::ofstream(csv, std::ios::binary) << to_csv();
  std::ofstream(json, std::ios::binary) << to_json();
}

std::pair<double, double> mean_stderr(std::span<const double> samples) {
  if (samples.empty()) return {0.0, 0.0};
  double mean = 0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(samples.size());
  if (samples.size() < 2) return {mean, 0.0};
  double var = 0;
  for (double s : samples) var += (s - mean) * (s - mean);
  var /= static_cast<double>(samples.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples.size()))};
}

namespace {

// 9 significant digits: differences inside the 1e-9 verification tolerance
// collapse to the same fingerprint.
std::uint64_t hash_value(double v, std::uint64_t h) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.9g", v);
  return fnv1a({buf, static_cast<std::size_t>(n)}, h) * 0x100000001b3ull ^ 0x2c;
}

}  // namespace

std::uint64_t checksum_rows(const DenseMat& m) {
  std::uint64_t total = fnv1a("rows") + static_cast<std::uint64_t>(m.cols());
  for (index_t i = 0; i < m.rows(); ++i) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (index_t j = 0; j < m.cols(); ++j) h = hash_value(m(i, j), h);
    total += h;  // wrapping sum keeps the hash order-independent
  }
  return total;
}

std::uint64_t checksum_labels(std::span<const std::int64_t> labels) {
  std::uint64_t total = fnv1a("labels");
  for (std::int64_t v : labels) {
    const std::string s = std::to_string(v);
    total += fnv1a(s);
  }
  return total;
}

CompareResult compare_matrices(const DenseMat& a, const DenseMat& b, double rel_tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    return {false, "shape " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                       std::to_string(b.rows()) + "x" + std::to_string(b.cols())};
  index_t bad = 0;
  double worst = 0;
  index_t worst_r = -1, worst_c = -1;
  for (index_t i = 0; i < a.rows(); ++i) {
    for (index_t j = 0; j < a.cols(); ++j) {
      const double x = a(i, j);
      const double y = b(i, j);
      if (x == y) continue;
      const double rel = std::abs(x - y) / std::max(std::abs(x), std::abs(y));
      if (rel <= rel_tol) continue;
      ++bad;
      if (rel > worst) {
        worst = rel;
        worst_r = i;
        worst_c = j;
      }
    }
  }
  if (bad == 0) return {};
  return {false, std::to_string(bad) + " cells differ; worst rel " + fmt_g(worst) + " at (" +
                     std::to_string(worst_r) + "," + std::to_string(worst_c) + ")"};
}

CompareResult compare_labels(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  if (a.size() != b.size())
    return {false, "length " + std::to_string(a.size()) + " vs " + std::to_string(b.size())};
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i])
      return {false, "label[" + std::to_string(i) + "] " + std::to_string(a[i]) + " vs " +
                         std::to_string(b[i])};
  return {};
}

}  // namespace laq::cli
