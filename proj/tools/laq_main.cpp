#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "laq/cli.hpp"

namespace {

using namespace laq;

int dispatch(int argc, char** argv) {
  CLI::App app{"LAQ: star-schema queries and predictive pipelines as linear algebra"};
  app.require_subcommand(1);

  // gen ----------------------------------------------------------------
  auto* gen = app.add_subcommand("gen", "generate a synthetic star-schema dataset");
  std::string gen_setting = "2";
  cli::GenOptions gen_opt;
  std::string gen_config;
  index_t tree_leaves = 64, tree_features = 0, linear_out = 2;
  std::uint64_t model_seed = 7;
  bool with_models = false;
  gen->add_option("--config", gen_config, "key=value config file");
  gen->add_option("--setting", gen_setting, "cardinality setting: 1, 2 or ssb");
  gen->add_option("--sf", gen_opt.cfg.sf, "scale factor (>= 1)");
  gen->add_option("--seed", gen_opt.cfg.seed, "generator seed");
  gen->add_option("--features", gen_opt.cfg.feature_width, "model feature columns across dims");
  gen->add_option("--dangling", gen_opt.cfg.dangling_fraction, "fraction of unmatched fact keys");
  gen->add_option("--max-bytes", gen_opt.cfg.max_bytes, "capacity guard");
  gen->add_option("--out", gen_opt.out_dir, "output directory")->required();
  gen->add_flag("--models", with_models, "also write model files (needs --features > 0)");
  gen->add_option("--tree-leaves", tree_leaves, "generated tree leaf count");
  gen->add_option("--tree-features", tree_features, "tree feature pool (default: all)");
  gen->add_option("--linear-out", linear_out, "linear operator output width");
  gen->add_option("--model-seed", model_seed, "model generator seed");

  // query --------------------------------------------------------------
  auto* query = app.add_subcommand("query", "run a workload query");
  cli::QueryOptions query_opt;
  query->add_option("--dataset", query_opt.dataset, "dataset directory")->required();
  query->add_option("--query", query_opt.query_id, "query id (11..43)")->required();
  query->add_option("--engine", query_opt.engine, "laq | oracle");
  query->add_option("--repeats", query_opt.repeats, "timed repetitions (default 10)");
  query->add_flag("--verify", query_opt.verify, "check LAQ result against the oracle");
  query->add_option("--targets", query_opt.selectivity_targets, "selectivity targets per group query");
  query->add_option("--out", query_opt.out, "report file (csv; json mirror written too)");

  // pipeline -----------------------------------------------------------
  auto* pipeline = app.add_subcommand("pipeline", "run a star join + prediction pipeline");
  cli::PipelineOptions pipe_opt;
  pipeline->add_option("--dataset", pipe_opt.dataset, "dataset directory")->required();
  pipeline->add_option("--model", pipe_opt.model, "model file (tree or linear)")->required();
  pipeline->add_option("--mode", pipe_opt.mode, "fused | nonfused | oracle");
  pipeline->add_option("--repeats", pipe_opt.repeats, "timed repetitions (default 10)");
  pipeline->add_flag("--verify", pipe_opt.verify, "check predictions against the oracle");
  pipeline->add_option("--out", pipe_opt.out, "report file (csv; json mirror written too)");

  // cost ---------------------------------------------------------------
  auto* cost = app.add_subcommand("cost", "evaluate the fusion cost model");
  cli::CostOptions cost_opt;
  std::vector<std::int64_t> dim_rows{2000, 2000, 2555};
  cost->add_option("--kind", cost_opt.kind, "linear | tree");
  cost->add_option("--i", cost_opt.inputs.target_rows, "target rows after joining")->required();
  cost->add_option("--k", cost_opt.inputs.input_width, "model input width")->required();
  cost->add_option("--l", cost_opt.inputs.output_width, "model output width")->required();
  cost->add_option("--p", cost_opt.inputs.tree_features, "tree features (default k)");
  cost->add_option("--r", dim_rows, "dimension row counts");
  cost->add_option("--threshold", cost_opt.threshold, "fuse when ratio exceeds this");
  cost->add_option("--sweep-out", cost_opt.sweep_out, "write a k x l ratio grid CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitUsage;
  }

  try {
    if (*gen) {
      if (!gen_config.empty()) {
        cli::GenOptions from_file = cli::parse_gen_config(gen_config);
        if (gen_opt.out_dir.empty()) gen_opt.out_dir = from_file.out_dir;
        from_file.out_dir = gen_opt.out_dir;
        // Flags override file values only when given on the command line.
        if (gen->count("--setting")) from_file.cfg.setting = gen_opt.cfg.setting;
        if (gen->count("--sf")) from_file.cfg.sf = gen_opt.cfg.sf;
        if (gen->count("--seed")) from_file.cfg.seed = gen_opt.cfg.seed;
        if (gen->count("--features")) from_file.cfg.feature_width = gen_opt.cfg.feature_width;
        if (gen->count("--dangling")) from_file.cfg.dangling_fraction = gen_opt.cfg.dangling_fraction;
        if (gen->count("--max-bytes")) from_file.cfg.max_bytes = gen_opt.cfg.max_bytes;
        gen_opt = std::move(from_file);
      }
      if (gen->count("--setting")) {
        if (gen_setting == "1")
          gen_opt.cfg.setting = bench::Setting::S1;
        else if (gen_setting == "2")
          gen_opt.cfg.setting = bench::Setting::S2;
        else if (gen_setting == "ssb")
          gen_opt.cfg.setting = bench::Setting::Ssb;
        else {
          std::cerr << "gen: setting must be 1, 2 or ssb\n";
          return cli::kExitUsage;
        }
      }
      if (with_models || gen->count("--tree-leaves") || gen->count("--linear-out")) {
        cli::ModelSpec spec;
        spec.tree_leaves = tree_leaves;
        spec.tree_features = tree_features;
        spec.linear_out = linear_out;
        spec.seed = model_seed;
        gen_opt.models = spec;
      }
      return cli::cmd_gen(gen_opt);
    }
    if (*query) return cli::cmd_query(query_opt);
    if (*pipeline) return cli::cmd_pipeline(pipe_opt);
    if (*cost) {
      cost_opt.inputs.dim_rows = dim_rows;
      if (cost_opt.inputs.tree_features == 0)
        cost_opt.inputs.tree_features = cost_opt.inputs.input_width;
      return cli::cmd_cost(cost_opt);
    }
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return cli::kExitCapacity;
  } catch (const DomainError& e) {
    std::cerr << "invalid inputs: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const GenError& e) {
    std::cerr << "generation error: " << e.what() << "\n";
    return cli::kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return cli::kExitUsage;
}

}  // namespace

int main(int argc, char** argv) { return dispatch(argc, argv); }
