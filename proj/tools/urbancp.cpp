#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "urbancp/commands.hpp"

namespace {

using namespace urbancp;
using namespace urbancp::cli;

struct CommonArgs {
  std::vector<std::string> configs;
  std::vector<std::pair<std::string, std::string>> overrides;
};

void add_config_options(CLI::App* sub, CommonArgs& args) {
  sub->add_option("-c,--config", args.configs, "config file; may be repeated, later files win");
  for (const auto& key : config_keys()) {
    const std::string name = key.name;
    sub->add_option_function<std::string>(
           "--" + name, [&args, name](const std::string& v) { args.overrides.emplace_back(name, v); },
           key.help)
        ->group("Config keys");
  }
}

RunConfig resolve(const CommonArgs& args) {
  RunConfig cfg;
  for (const auto& path : args.configs) apply_config_file(cfg, path);
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) cfg.output_dir = env;
  for (const auto& [k, v] : args.overrides) set_config_value(cfg, k, v);
  return cfg;
}

int fail(const std::string& kind, const std::string& what) {
  std::cerr << "error:" << kind << ": " << what << '\n';
  if (kind == "input") return 2;
  if (kind == "config") return 3;
  if (kind == "io") return 4;
  if (kind == "no_regular_series") return 5;
  if (kind == "nothing_observed") return 6;
  if (kind == "usage") return 64;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Urban and time aware tensor completion for traffic data"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* build = app.add_subcommand("build-tensor", "aggregate trajectories into a traffic tensor");
  auto* context = app.add_subcommand("context", "compute the urban and temporal matrices");
  auto* complete = app.add_subcommand("complete", "complete the masked tensor and append a result row");
  auto* sweep = app.add_subcommand("sweep", "paired augmented/baseline runs over rates, ranks and seeds");
  auto* synth = app.add_subcommand("synth", "write a planted synthetic tensor with matching POIs");
  for (auto* sub : {build, context, complete, sweep, synth}) add_config_options(sub, args);

  std::string reference, estimate;
  auto* eval = app.add_subcommand("eval", "relative error and sparsity of an estimate");
  eval->add_option("reference", reference, "ground-truth tensor file")->required();
  eval->add_option("estimate", estimate, "estimated tensor file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    Json out;
    if (*eval) {
      const auto s = cmd_eval(reference, estimate);
      out = {{"re", s.re}, {"s_log_reference", s.s_log_reference}, {"s_log_estimate", s.s_log_estimate}};
      std::cout << out.dump() << '\n';
      return 0;
    }
    const RunConfig cfg = resolve(args);
    if (*build) {
      const auto s = cmd_build_tensor(cfg, std::cerr);
      out = {{"tensor", cfg.tensor_path()}, {"dims", {s.dims[0], s.dims[1], s.dims[2]}},
             {"points", s.stats.points}, {"malformed_rows", s.malformed_rows}, {"sum", s.sum},
             {"s_log", s.s_log}};
    } else if (*context) {
      const auto s = cmd_context(cfg, std::cerr);
      out = {{"period", s.temporal.ctx.period}, {"fallback", s.temporal.ctx.fallback},
             {"fiber", {s.temporal.ctx.i, s.temporal.ctx.j}}, {"urban_inert", s.urban.inert}};
    } else if (*complete) {
      const auto s = cmd_complete(cfg, std::cerr);
      out = {{"re", *s.row.re}, {"iterations", s.report.iterations}, {"converged", s.report.converged},
             {"results", cfg.results_path()}};
    } else if (*sweep) {
      const auto s = cmd_sweep(cfg, std::cerr);
      out = {{"ran", s.ran}, {"skipped", s.skipped}, {"failed", s.failed}, {"results", s.results},
             {"summary", s.summary}};
    } else if (*synth) {
      const auto s = cmd_synth(cfg);
      out = {{"tensor", cfg.tensor_path()}, {"dims", {s.dims[0], s.dims[1], s.dims[2]}},
             {"grid_config", s.grid_config}};
    }
    std::cout << out.dump() << '\n';
    return 0;
  } catch (const Error& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
