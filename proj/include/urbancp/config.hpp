#pragma once

// Run configuration for the command-line tool: a flat `section.key = value`
// text file, `#` starts a comment. Every key can be overridden on the
// command line as `--section.key value`.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "urbancp/error.hpp"
#include "urbancp/io.hpp"
#include "urbancp/pipeline.hpp"
#include "urbancp/solver.hpp"
#include "urbancp/synthetic.hpp"
#include "urbancp/temporal.hpp"
#include "urbancp/urban.hpp"

namespace urbancp::cli {

inline constexpr const char* kOutputDirEnv = "URBANCP_OUTPUT_DIR";

struct RunConfig {
  std::string dataset = "synthetic";

  std::string trajectories;
  std::string trajectory_format = "tdrive";  ///< tdrive | porto
  std::size_t max_objects = 0;               ///< 0 keeps every object
  std::string pois;
  std::string output_dir = "out";
  std::string tensor;    ///< default <output_dir>/tensor.bin
  std::string mask;      ///< mask file; when empty the mask spec below is used
  std::string urban;     ///< U csv; when empty U is computed from the POIs
  std::string temporal;  ///< To csv; when empty To is computed from the data
  std::string results;   ///< default <output_dir>/results.csv

  BoundingBox bbox{41.10, 41.25, -8.70, -8.50};
  double cell_size_km = 1.0;

  std::string time_start = "auto";  ///< epoch seconds, datetime, or auto (earliest sample)
  std::int64_t bin_seconds = 3600;
  Index horizon = 24;

  TensorBuildMode build_mode = TensorBuildMode::AllLocations;

  std::string mask_kind = "random";  ///< random | structured | none
  double mask_rate = 0.6;
  Index mask_duration = 24;
  std::uint64_t mask_seed = 1;

  SolverOptions solver;
  double structured_beta = 0.01;  ///< beta used instead of solver.beta under structured masks

  SampEnParams sampen;
  bool skip_constant = true;
  std::set<std::string> transport = default_transport_categories();

  std::vector<double> sweep_rates{0.2, 0.4, 0.6, 0.8};
  std::vector<Index> sweep_ranks{3};
  std::vector<std::string> sweep_kinds{"random"};
  std::vector<std::uint64_t> sweep_seeds{1};

  SyntheticSpec synth;

  std::filesystem::path out() const { return output_dir; }
  std::string tensor_path() const { return tensor.empty() ? (out() / "tensor.bin").string() : tensor; }
  std::string results_path() const { return results.empty() ? (out() / "results.csv").string() : results; }

  /// beta actually used for the configured mask kind
  double effective_beta() const { return mask_kind == "structured" ? structured_beta : solver.beta; }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline double to_real(const std::string& key, const std::string& v) {
  const auto d = io::parse_double(v);
  if (!d) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return *d;
}

inline std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long n = std::stoll(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

inline std::uint64_t to_seed(const std::string& key, const std::string& v) {
  const auto n = to_int(key, v);
  if (n < 0) throw ConfigError(key + ": seeds must be non-negative");
  return static_cast<std::uint64_t>(n);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

inline std::string one_of(const std::string& key, const std::string& v,
                          std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string msg = key + ": '" + v + "' is not one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ConfigError(msg);
}

}  // namespace detail

struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
};

inline const std::vector<ConfigKey>& config_keys() {
  using namespace detail;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    auto add = [&k](std::string name, std::string help,
                    std::function<void(RunConfig&, const std::string&, const std::string&)> f) {
      k.push_back({name, std::move(help), [name, f](RunConfig& c, const std::string& v) { f(c, name, v); }});
    };
    using S = const std::string&;
    add("dataset", "dataset label written to result rows", [](RunConfig& c, S, S v) { c.dataset = v; });
    add("paths.trajectories", "trajectory file", [](RunConfig& c, S, S v) { c.trajectories = v; });
    add("paths.format", "trajectory format: tdrive | porto",
        [](RunConfig& c, S key, S v) { c.trajectory_format = one_of(key, v, {"tdrive", "porto"}); });
    add("paths.max_objects", "keep only the first N objects (0 = all)", [](RunConfig& c, S key, S v) {
      const auto n = to_int(key, v);
      if (n < 0) throw ConfigError(key + ": must be >= 0");
      c.max_objects = static_cast<std::size_t>(n);
    });
    add("paths.pois", "POI csv (lat,lon,category)", [](RunConfig& c, S, S v) { c.pois = v; });
    add("paths.output_dir", "output directory", [](RunConfig& c, S, S v) { c.output_dir = v; });
    add("paths.tensor", "tensor file (default <output_dir>/tensor.bin)", [](RunConfig& c, S, S v) { c.tensor = v; });
    add("paths.mask", "mask file overriding the mask spec", [](RunConfig& c, S, S v) { c.mask = v; });
    add("paths.urban", "urban similarity csv", [](RunConfig& c, S, S v) { c.urban = v; });
    add("paths.temporal", "temporal matrix csv", [](RunConfig& c, S, S v) { c.temporal = v; });
    add("paths.results", "results csv (default <output_dir>/results.csv)", [](RunConfig& c, S, S v) { c.results = v; });
    add("grid.lat_min", "bounding box", [](RunConfig& c, S key, S v) { c.bbox.lat_min = to_real(key, v); });
    add("grid.lat_max", "bounding box", [](RunConfig& c, S key, S v) { c.bbox.lat_max = to_real(key, v); });
    add("grid.lon_min", "bounding box", [](RunConfig& c, S key, S v) { c.bbox.lon_min = to_real(key, v); });
    add("grid.lon_max", "bounding box", [](RunConfig& c, S key, S v) { c.bbox.lon_max = to_real(key, v); });
    add("grid.cell_size_km", "cell edge in km", [](RunConfig& c, S key, S v) { c.cell_size_km = to_real(key, v); });
    add("time.start", "bin 0 start: epoch seconds, 'YYYY-MM-DD HH:MM:SS' or auto",
        [](RunConfig& c, S key, S v) {
          if (v != "auto" && !io::parse_datetime(v)) to_int(key, v);
          c.time_start = v;
        });
    add("time.bin_seconds", "bin width in seconds", [](RunConfig& c, S key, S v) { c.bin_seconds = to_int(key, v); });
    add("time.horizon", "number of bins T", [](RunConfig& c, S key, S v) { c.horizon = to_int(key, v); });
    add("tensor.mode", "all_locations | source_to_destination", [](RunConfig& c, S key, S v) {
      c.build_mode = one_of(key, v, {"all_locations", "source_to_destination"}) == "all_locations"
                         ? TensorBuildMode::AllLocations
                         : TensorBuildMode::SourceToDestination;
    });
    add("mask.kind", "random | structured | none",
        [](RunConfig& c, S key, S v) { c.mask_kind = one_of(key, v, {"random", "structured", "none"}); });
    add("mask.rate", "target missing rate", [](RunConfig& c, S key, S v) { c.mask_rate = to_real(key, v); });
    add("mask.duration", "structured outage length in bins", [](RunConfig& c, S key, S v) { c.mask_duration = to_int(key, v); });
    add("mask.seed", "mask seed", [](RunConfig& c, S key, S v) { c.mask_seed = to_seed(key, v); });
    add("solver.rank", "CP rank R", [](RunConfig& c, S key, S v) { c.solver.rank = to_int(key, v); });
    add("solver.lambda", "ridge weight", [](RunConfig& c, S key, S v) { c.solver.lambda = to_real(key, v); });
    add("solver.beta", "context weight (random masks)", [](RunConfig& c, S key, S v) { c.solver.beta = to_real(key, v); });
    add("solver.structured_beta", "context weight (structured masks)",
        [](RunConfig& c, S key, S v) { c.structured_beta = to_real(key, v); });
    add("solver.tol", "stop when a sweep lowers the objective by less", [](RunConfig& c, S key, S v) { c.solver.tol = to_real(key, v); });
    add("solver.max_iters", "sweep limit", [](RunConfig& c, S key, S v) {
      c.solver.max_iters = static_cast<int>(to_int(key, v));
    });
    add("solver.seed", "factor initialisation seed", [](RunConfig& c, S key, S v) { c.solver.seed = to_seed(key, v); });
    add("solver.literal", "use the literal normal-equation variant", [](RunConfig& c, S key, S v) {
      c.solver.equations = to_bool(key, v) ? NormalEquations::PaperLiteral : NormalEquations::Consistent;
    });
    add("sampen.m", "template length", [](RunConfig& c, S key, S v) { c.sampen.m = static_cast<int>(to_int(key, v)); });
    add("sampen.th", "tolerance in standard deviations", [](RunConfig& c, S key, S v) { c.sampen.th = to_real(key, v); });
    add("sampen.skip_constant", "ignore constant fibers when ranking regularity",
        [](RunConfig& c, S key, S v) { c.skip_constant = to_bool(key, v); });
    add("urban.transport_categories", "comma list of transport POI categories", [](RunConfig& c, S, S v) {
      const auto items = split_list(v);
      c.transport = {items.begin(), items.end()};
    });
    add("sweep.rates", "comma list of missing rates", [](RunConfig& c, S key, S v) {
      c.sweep_rates.clear();
      for (const auto& s : split_list(v)) c.sweep_rates.push_back(to_real(key, s));
    });
    add("sweep.ranks", "comma list of ranks", [](RunConfig& c, S key, S v) {
      c.sweep_ranks.clear();
      for (const auto& s : split_list(v)) c.sweep_ranks.push_back(to_int(key, s));
    });
    add("sweep.kinds", "comma list of mask kinds", [](RunConfig& c, S key, S v) {
      c.sweep_kinds.clear();
      for (const auto& s : split_list(v)) c.sweep_kinds.push_back(one_of(key, s, {"random", "structured"}));
    });
    add("sweep.seeds", "comma list of seeds", [](RunConfig& c, S key, S v) {
      c.sweep_seeds.clear();
      for (const auto& s : split_list(v)) c.sweep_seeds.push_back(to_seed(key, s));
    });
    add("synth.regions", "synthetic M", [](RunConfig& c, S key, S v) { c.synth.regions = to_int(key, v); });
    add("synth.horizon", "synthetic T", [](RunConfig& c, S key, S v) { c.synth.horizon = to_int(key, v); });
    add("synth.rank", "synthetic rank", [](RunConfig& c, S key, S v) { c.synth.rank = to_int(key, v); });
    add("synth.blocks", "synthetic region blocks", [](RunConfig& c, S key, S v) { c.synth.blocks = to_int(key, v); });
    add("synth.period", "synthetic period in bins", [](RunConfig& c, S key, S v) { c.synth.period = to_int(key, v); });
    add("synth.noise", "synthetic relative noise", [](RunConfig& c, S key, S v) { c.synth.noise = to_real(key, v); });
    add("synth.seed", "synthetic seed", [](RunConfig& c, S key, S v) { c.synth.seed = to_seed(key, v); });
    return k;
  }();
  return keys;
}

inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : config_keys())
    if (k.name == key) return k.set(cfg, detail::trim(value));
  throw ConfigError("unknown config key '" + key + "'");
}

inline void apply_config(RunConfig& cfg, std::istream& is, const std::string& origin = "config") {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    try {
      set_config_value(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path);
  apply_config(cfg, is, path);
}

/// Range checks shared by all commands.
inline void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(c.cell_size_km > 0.0, "grid.cell_size_km must be > 0");
  need(c.bbox.lat_min < c.bbox.lat_max && c.bbox.lon_min < c.bbox.lon_max, "grid: inverted bounding box");
  need(c.bin_seconds > 0, "time.bin_seconds must be > 0");
  need(c.horizon >= 2, "time.horizon must be >= 2");
  need(c.mask_rate >= 0.0 && c.mask_rate < 1.0, "mask.rate must be in [0, 1)");
  need(c.mask_duration >= 1, "mask.duration must be >= 1");
  need(c.solver.rank >= 1, "solver.rank must be >= 1");
  need(c.solver.lambda >= 0.0 && c.solver.beta >= 0.0 && c.structured_beta >= 0.0,
       "solver.lambda and solver.beta must be >= 0");
  need(c.solver.tol > 0.0, "solver.tol must be > 0");
  need(c.solver.max_iters >= 1, "solver.max_iters must be >= 1");
  need(c.sampen.m >= 1 && c.sampen.th > 0.0, "sampen.m must be >= 1 and sampen.th > 0");
  for (double r : c.sweep_rates) need(r >= 0.0 && r < 1.0, "sweep.rates must lie in [0, 1)");
  for (Index r : c.sweep_ranks) need(r >= 1, "sweep.ranks must be >= 1");
  need(!c.sweep_rates.empty() && !c.sweep_ranks.empty() && !c.sweep_kinds.empty() &&
           !c.sweep_seeds.empty(),
       "sweep lists must not be empty");
}

}  // namespace urbancp::cli
