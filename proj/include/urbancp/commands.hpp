#pragma once

// The tool's subcommands as library functions. Each reads what it needs from
// a RunConfig, writes its artifacts under the output directory and returns a
// summary; warnings go to `log`.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "urbancp/config.hpp"
#include "urbancp/io.hpp"
#include "urbancp/pipeline.hpp"
#include "urbancp/solver.hpp"
#include "urbancp/synthetic.hpp"
#include "urbancp/temporal.hpp"
#include "urbancp/urban.hpp"

namespace urbancp::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

/// Shortest decimal that reads back to the same double.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

inline const char* mode_name(TensorBuildMode m) {
  return m == TensorBuildMode::AllLocations ? "all_locations" : "source_to_destination";
}

inline void write_json(const fs::path& path, const Json& j) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << j.dump(2) << '\n';
  if (!os) throw IoError("failed writing " + path.string());
}

inline void ensure_output_dir(const RunConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out(), ec);
  if (ec) throw IoError("cannot create output directory " + cfg.output_dir + ": " + ec.message());
}

// ---------------------------------------------------------------- results

struct ResultRow {
  std::string dataset;
  std::string mode;
  std::string mask_kind;
  double missing_rate = 0.0;
  Index rank = 0;
  double lambda = 0.0;
  double beta = 0.0;
  std::optional<double> re;
  int iterations = 0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::string method;  ///< augmented | baseline
  std::string status = "ok";

  static constexpr const char* kHeader =
      "dataset,mode,mask_kind,missing_rate,rank,lambda,beta,re,iterations,wall_seconds,seed,method,status";

  /// Everything except RE, iterations, wall time and status: identifies a run.
  std::string key() const {
    return dataset + ',' + mode + ',' + mask_kind + ',' + fmt(missing_rate) + ',' +
           std::to_string(rank) + ',' + fmt(lambda) + ',' + fmt(beta) + ',' + std::to_string(seed) +
           ',' + method;
  }

  std::string csv() const {
    return dataset + ',' + mode + ',' + mask_kind + ',' + fmt(missing_rate) + ',' +
           std::to_string(rank) + ',' + fmt(lambda) + ',' + fmt(beta) + ',' + (re ? fmt(*re) : "") +
           ',' + std::to_string(iterations) + ',' + fmt(wall_seconds) + ',' + std::to_string(seed) +
           ',' + method + ',' + status;
  }

  static ResultRow parse(const std::string& line) {
    const auto f = io::split_csv_line(line);
    if (f.size() != 13) throw IoError("results row has " + std::to_string(f.size()) + " fields: " + line);
    auto num = [&](std::size_t i) {
      const auto d = io::parse_double(f[i]);
      if (!d) throw IoError("results row: bad number '" + f[i] + "'");
      return *d;
    };
    ResultRow r;
    r.dataset = f[0];
    r.mode = f[1];
    r.mask_kind = f[2];
    r.missing_rate = num(3);
    r.rank = static_cast<Index>(num(4));
    r.lambda = num(5);
    r.beta = num(6);
    if (!f[7].empty()) r.re = num(7);
    r.iterations = static_cast<int>(num(8));
    r.wall_seconds = num(9);
    r.seed = static_cast<std::uint64_t>(num(10));
    r.method = f[11];
    r.status = f[12];
    return r;
  }
};

/// Append-only results file; writes the header when the file is new.
class ResultsAppender {
 public:
  explicit ResultsAppender(const std::string& path) : path_(path) {
    const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    if (!fresh) check_header();
    os_.open(path, std::ios::app);
    if (!os_) throw IoError("cannot open " + path + " for appending");
    if (fresh) os_ << ResultRow::kHeader << '\n' << std::flush;
  }

  void append(const ResultRow& row) {
    os_ << row.csv() << '\n' << std::flush;
    if (!os_) throw IoError("failed appending to " + path_);
  }

 private:
  void check_header() const {
    std::ifstream is(path_);
    std::string first;
    std::getline(is, first);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first != ResultRow::kHeader) throw IoError(path_ + ": unexpected results header");
  }

  std::string path_;
  std::ofstream os_;
};

inline std::vector<ResultRow> read_results(const std::string& path) {
  std::vector<ResultRow> rows;
  std::ifstream is(path);
  if (!is) return rows;
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line != ResultRow::kHeader) throw IoError(path + ": unexpected results header");
      continue;
    }
    rows.push_back(ResultRow::parse(line));
  }
  return rows;
}

// ---------------------------------------------------------------- masks and context

inline MaskTensor make_mask(const Dims& dims, const std::string& kind, double rate,
                            Index duration, std::uint64_t seed) {
  if (kind == "none") return MaskTensor(dims);
  if (kind == "random") return random_mask(dims, rate, seed);
  if (kind != "structured") throw ConfigError("unknown mask kind '" + kind + "'");
  if (duration > dims[2])
    throw ConfigError("mask.duration " + std::to_string(duration) + " exceeds the horizon " +
                      std::to_string(dims[2]));
  // rate = cell_fraction * duration / T
  const double fraction = rate * static_cast<double>(dims[2]) / static_cast<double>(duration);
  if (fraction >= 1.0)
    throw ConfigError("structured mask: rate " + fmt(rate) + " needs more than every cell at duration " +
                      std::to_string(duration));
  return structured_mask(dims, fraction, duration, seed);
}

inline MaskTensor configured_mask(const RunConfig& cfg, const Dims& dims) {
  if (!cfg.mask.empty()) {
    MaskTensor w = io::read_mask(cfg.mask);
    if (w.dims() != dims)
      throw InputError("mask dims " + to_string(w.dims()) + " differ from tensor dims " + to_string(dims));
    return w;
  }
  return make_mask(dims, cfg.mask_kind, cfg.mask_rate, cfg.mask_duration, cfg.mask_seed);
}

struct UrbanContext {
  Matrix u;
  std::size_t pois = 0;
  std::size_t malformed = 0;
  std::size_t outside = 0;
  std::size_t empty_regions = 0;
  bool inert = false;  ///< no POI file: U is zero
};

inline UrbanContext urban_context(const RunConfig& cfg, Index regions, std::ostream& log) {
  UrbanContext ctx;
  if (cfg.pois.empty()) {
    log << "warning: no POI file configured; urban similarity is the zero matrix\n";
    ctx.u = Matrix::Zero(regions, regions);
    ctx.inert = true;
    ctx.empty_regions = static_cast<std::size_t>(regions);
    return ctx;
  }
  std::ifstream is(cfg.pois);
  if (!is) throw IoError("cannot open POI file " + cfg.pois);
  const io::PoiFile file = io::read_pois(is);
  const GridSpec grid = grid_segment(cfg.bbox, cfg.cell_size_km);
  if (grid.regions() != regions)
    throw ConfigError("grid has " + std::to_string(grid.regions()) + " regions but the tensor has " +
                      std::to_string(regions));
  const auto groups = pois_by_region(file.pois, grid);
  std::vector<UrbanFeatureVector> features;
  std::size_t placed = 0;
  for (const auto& g : groups) {
    features.push_back(feature_vector(g, cfg.transport));
    placed += g.size();
    ctx.empty_regions += g.empty();
  }
  ctx.u = urban_similarity_matrix(features);
  ctx.pois = file.pois.size();
  ctx.malformed = file.malformed_rows;
  ctx.outside = file.pois.size() - placed;
  return ctx;
}

struct TemporalSummary {
  TemporalContext ctx;
  std::string note;  ///< why the fallback was taken, if it was
  Matrix to;
};

inline TemporalSummary temporal_context(const RunConfig& cfg, const Tensor3& y, const MaskTensor& w) {
  TemporalSummary out;
  try {
    out.ctx = analyze_temporal(y, w, cfg.sampen, cfg.skip_constant);
    if (out.ctx.fallback) out.note = "no significant concave period";
  } catch (const NoRegularSeriesError& e) {
    out.ctx = TemporalContext{};
    out.note = e.what();
  }
  out.to = toeplitz_temporal(y.dim(2), out.ctx.period).values;
  return out;
}

// ---------------------------------------------------------------- build-tensor

struct BuildSummary {
  Dims dims{};
  BuildStats stats;
  std::size_t rows = 0;
  std::size_t malformed_rows = 0;
  std::int64_t start = 0;
  double sum = 0.0;
  double s_log = 0.0;
};

inline BuildSummary cmd_build_tensor(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  if (cfg.trajectories.empty()) throw ConfigError("paths.trajectories is not set");
  std::ifstream is(cfg.trajectories);
  if (!is) throw IoError("cannot open trajectory file " + cfg.trajectories);
  const io::TrajectoryFile file = cfg.trajectory_format == "porto"
                                      ? io::read_porto(is, cfg.max_objects)
                                      : io::read_tdrive(is, cfg.max_objects);
  const GridSpec grid = grid_segment(cfg.bbox, cfg.cell_size_km);

  TimeBinning tb{0, cfg.bin_seconds, cfg.horizon};
  if (cfg.time_start == "auto") {
    for (std::size_t n = 0; n < file.points.size(); ++n)
      tb.start = n == 0 ? file.points[n].timestamp : std::min(tb.start, file.points[n].timestamp);
  } else if (auto dt = io::parse_datetime(cfg.time_start)) {
    tb.start = *dt;
  } else {
    tb.start = detail::to_int("time.start", cfg.time_start);
  }

  BuildSummary s;
  const Tensor3 x = build_tensor(file.points, grid, tb, cfg.build_mode, &s.stats);
  if (file.points.empty()) log << "warning: no trajectory points read; writing a zero tensor\n";
  if (file.malformed_rows) log << "warning: skipped " << file.malformed_rows << " malformed rows\n";

  ensure_output_dir(cfg);
  io::write_tensor(cfg.tensor_path(), x);
  s.dims = x.dims();
  s.rows = file.rows;
  s.malformed_rows = file.malformed_rows;
  s.start = tb.start;
  s.sum = x.sum();
  s.s_log = sparsity_log(x);

  Json j;
  j["tensor"] = cfg.tensor_path();
  j["dims"] = {s.dims[0], s.dims[1], s.dims[2]};
  j["mode"] = mode_name(cfg.build_mode);
  j["grid"] = {{"rows", grid.n_rows}, {"cols", grid.n_cols}, {"cell_size_km", grid.cell_size_km}};
  j["time"] = {{"start", tb.start}, {"bin_seconds", tb.bin_seconds}, {"horizon", tb.horizon}};
  j["rows"] = s.rows;
  j["malformed_rows"] = s.malformed_rows;
  j["points"] = s.stats.points;
  j["objects"] = s.stats.objects;
  j["dropped_outside"] = s.stats.dropped_outside;
  j["dropped_out_of_horizon"] = s.stats.dropped_out_of_horizon;
  j["sum"] = s.sum;
  j["s_log"] = s.s_log;
  write_json(cfg.out() / "build_report.json", j);
  return s;
}

// ---------------------------------------------------------------- context

struct ContextSummary {
  UrbanContext urban;
  TemporalSummary temporal;
};

inline ContextSummary cmd_context(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Tensor3 x = io::read_tensor(cfg.tensor_path());
  urbancp::detail::require(x.dim(0) == x.dim(1), "context: tensor must be M x M x T");
  const MaskTensor w = configured_mask(cfg, x.dims());
  ContextSummary s{urban_context(cfg, x.dim(0), log), temporal_context(cfg, w.apply(x), w)};
  if (s.temporal.ctx.fallback) log << "warning: period not detected (" << s.temporal.note << "); using t* = 1\n";

  ensure_output_dir(cfg);
  io::write_matrix_csv((cfg.out() / "urban.csv").string(), s.urban.u);
  io::write_matrix_csv((cfg.out() / "temporal.csv").string(), s.temporal.to);
  const auto& t = s.temporal.ctx;
  Json j;
  j["regions"] = x.dim(0);
  j["horizon"] = x.dim(2);
  j["mask"] = cfg.mask.empty() ? Json{{"kind", cfg.mask_kind}, {"rate", cfg.mask_rate},
                                      {"duration", cfg.mask_duration}, {"seed", cfg.mask_seed}}
                               : Json{{"file", cfg.mask}};
  j["fiber"] = {t.i, t.j};
  j["sampen"] = std::isfinite(t.sampen) ? Json(t.sampen) : Json(nullptr);
  j["period"] = t.period;
  j["fallback"] = t.fallback;
  if (t.fallback) j["fallback_reason"] = s.temporal.note;
  j["urban"] = {{"inert", s.urban.inert},
                {"pois", s.urban.pois},
                {"malformed_rows", s.urban.malformed},
                {"outside_grid", s.urban.outside},
                {"regions_without_pois", s.urban.empty_regions}};
  write_json(cfg.out() / "context.json", j);
  return s;
}

// ---------------------------------------------------------------- complete

struct CompleteOutcome {
  ResultRow row;
  SolveReport report;
  Tensor3 xhat;
};

/// Runs one completion of `x` under `w` with the given context; `beta`
/// selects augmented (> 0) or baseline (= 0).
inline CompleteOutcome run_completion(const RunConfig& cfg, const Tensor3& x, const MaskTensor& w,
                                      const Matrix& u, const Matrix& to, Index rank, double beta,
                                      std::uint64_t solver_seed, const std::string& kind,
                                      double rate, std::uint64_t seed) {
  CompletionProblem prob{w.apply(x), w, u, to, cfg.solver};
  prob.options.rank = rank;
  prob.options.beta = beta;
  prob.options.seed = solver_seed;
  CompletionResult res = complete(prob);
  CompleteOutcome out;
  out.row = {cfg.dataset,  mode_name(cfg.build_mode), kind, rate, rank, prob.options.lambda, beta,
             relative_error(x, res.xhat), res.report.iterations, res.report.wall_seconds, seed,
             beta > 0.0 ? "augmented" : "baseline", "ok"};
  out.report = std::move(res.report);
  out.xhat = std::move(res.xhat);
  return out;
}

inline Json report_json(const SolveReport& r, const SolverOptions& opt, double beta) {
  return Json{{"rank", opt.rank},
              {"lambda", opt.lambda},
              {"beta", beta},
              {"tol", opt.tol},
              {"max_iters", opt.max_iters},
              {"seed", opt.seed},
              {"equations", opt.equations == NormalEquations::Consistent ? "consistent" : "literal"},
              {"objective_trace", r.objective_trace},
              {"iterations", r.iterations},
              {"converged", r.converged},
              {"wall_seconds", r.wall_seconds}};
}

inline CompleteOutcome cmd_complete(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const Tensor3 x = io::read_tensor(cfg.tensor_path());
  urbancp::detail::require(x.dim(0) == x.dim(1), "complete: tensor must be M x M x T");
  const MaskTensor w = configured_mask(cfg, x.dims());
  const Matrix u = !cfg.urban.empty() ? io::read_matrix_csv(cfg.urban) : urban_context(cfg, x.dim(0), log).u;
  Matrix to;
  if (!cfg.temporal.empty()) {
    to = io::read_matrix_csv(cfg.temporal);
  } else {
    const auto t = temporal_context(cfg, w.apply(x), w);
    if (t.ctx.fallback) log << "warning: period not detected (" << t.note << "); using t* = 1\n";
    to = t.to;
  }
  const std::string kind = cfg.mask.empty() ? cfg.mask_kind : "file";
  const double rate = cfg.mask.empty() ? cfg.mask_rate : w.missing_rate();
  const double beta = cfg.effective_beta();

  CompleteOutcome out = run_completion(cfg, x, w, u, to, cfg.solver.rank, beta, cfg.solver.seed,
                                       kind, rate, cfg.mask_seed);
  if (!out.report.converged)
    log << "warning: stopped after " << out.report.iterations << " sweeps without converging\n";

  ensure_output_dir(cfg);
  io::write_tensor((cfg.out() / "xhat.bin").string(), out.xhat);
  SolverOptions opt = cfg.solver;
  Json j = report_json(out.report, opt, beta);
  j["re"] = *out.row.re;
  j["observed"] = w.observed_count();
  write_json(cfg.out() / "solve_report.json", j);
  ResultsAppender(cfg.results_path()).append(out.row);
  return out;
}

// ---------------------------------------------------------------- sweep

struct SweepSummary {
  std::size_t ran = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::string results;
  std::string summary;
};

/// Rows per (dataset, mode, kind, rate, rank, method) with min and median RE
/// over the successful seeds.
inline void write_sweep_summary(const std::vector<ResultRow>& rows, const fs::path& path) {
  std::map<std::string, std::vector<double>> groups;
  std::map<std::string, std::string> prefix;
  for (const auto& r : rows) {
    if (r.status != "ok" || !r.re) continue;
    const std::string p = r.dataset + ',' + r.mode + ',' + r.mask_kind + ',' + fmt(r.missing_rate) +
                          ',' + std::to_string(r.rank) + ',' + fmt(r.lambda) + ',' + fmt(r.beta) +
                          ',' + r.method;
    groups[p].push_back(*r.re);
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "dataset,mode,mask_kind,missing_rate,rank,lambda,beta,method,runs,re_min,re_median\n";
  for (auto& [p, v] : groups) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    const double median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    os << p << ',' << n << ',' << fmt(v.front()) << ',' << fmt(median) << '\n';
  }
}

inline SweepSummary cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  ensure_output_dir(cfg);
  const Tensor3 x = io::read_tensor(cfg.tensor_path());
  urbancp::detail::require(x.dim(0) == x.dim(1), "sweep: tensor must be M x M x T");
  SweepSummary s;
  s.results = cfg.results.empty() ? (cfg.out() / "sweep_results.csv").string() : cfg.results;
  s.summary = (fs::path(s.results).parent_path() / "sweep_summary.csv").string();

  std::set<std::string> done;
  for (const auto& r : read_results(s.results))
    if (r.status == "ok") done.insert(r.key());
  ResultsAppender out(s.results);

  const Matrix u = !cfg.urban.empty() ? io::read_matrix_csv(cfg.urban) : urban_context(cfg, x.dim(0), log).u;

  for (const auto& kind : cfg.sweep_kinds) {
    const double beta = kind == "structured" ? cfg.structured_beta : cfg.solver.beta;
    for (double rate : cfg.sweep_rates) {
      for (std::uint64_t seed : cfg.sweep_seeds) {
        std::vector<std::pair<Index, double>> todo;
        for (Index rank : cfg.sweep_ranks)
          for (double b : {beta, 0.0}) {
            ResultRow probe{cfg.dataset, mode_name(cfg.build_mode), kind, rate, rank,
                            cfg.solver.lambda, b, std::nullopt, 0, 0.0, seed,
                            b > 0.0 ? "augmented" : "baseline", "ok"};
            if (done.count(probe.key()))
              ++s.skipped;
            else
              todo.emplace_back(rank, b);
          }
        if (todo.empty()) continue;

        std::optional<MaskTensor> w;
        Matrix to;
        std::string failure;
        try {
          w = make_mask(x.dims(), kind, rate, cfg.mask_duration, seed);
          to = !cfg.temporal.empty() ? io::read_matrix_csv(cfg.temporal)
                                     : temporal_context(cfg, w->apply(x), *w).to;
        } catch (const Error& e) {
          failure = e.kind();
          log << "warning: " << kind << " rate " << fmt(rate) << " seed " << seed << ": " << e.what() << '\n';
        }
        for (const auto& [rank, b] : todo) {
          ResultRow row{cfg.dataset, mode_name(cfg.build_mode), kind, rate, rank, cfg.solver.lambda, b,
                        std::nullopt, 0, 0.0, seed, b > 0.0 ? "augmented" : "baseline", "ok"};
          if (failure.empty()) {
            try {
              row = run_completion(cfg, x, *w, u, to, rank, b, seed, kind, rate, seed).row;
            } catch (const Error& e) {
              row.status = "failed:" + e.kind();
              log << "warning: run " << row.key() << " failed: " << e.what() << '\n';
            }
          } else {
            row.status = "failed:" + failure;
          }
          out.append(row);
          ++(row.status == "ok" ? s.ran : s.failed);
        }
      }
    }
  }
  write_sweep_summary(read_results(s.results), s.summary);
  return s;
}

// ---------------------------------------------------------------- eval and synth

struct EvalSummary {
  double re = 0.0;
  double s_log_reference = 0.0;
  double s_log_estimate = 0.0;
};

inline EvalSummary cmd_eval(const std::string& reference, const std::string& estimate) {
  const Tensor3 x = io::read_tensor(reference);
  const Tensor3 xh = io::read_tensor(estimate);
  return {relative_error(x, xh), sparsity_log(x), sparsity_log(xh)};
}

/// Near-square factorisation rows x cols = m with rows <= cols.
inline std::pair<Index, Index> grid_shape(Index m) {
  Index rows = 1;
  for (Index r = 1; r * r <= m; ++r)
    if (m % r == 0) rows = r;
  return {rows, m / rows};
}

struct SynthSummary {
  Dims dims{};
  std::string grid_config;
};

/// Writes a planted tensor, POIs placed inside their regions' cells, and a
/// config fragment whose grid matches the tensor's region count.
inline SynthSummary cmd_synth(const RunConfig& cfg) {
  validate(cfg);
  const SyntheticTraffic s = planted_traffic(cfg.synth);
  const auto [rows, cols] = grid_shape(cfg.synth.regions);
  BoundingBox bbox{cfg.bbox.lat_min, cfg.bbox.lat_min + static_cast<double>(rows) * cfg.cell_size_km / kKmPerDegLat,
                   cfg.bbox.lon_min, cfg.bbox.lon_min};
  bbox.lon_max = bbox.lon_min + static_cast<double>(cols) * cfg.cell_size_km /
                                    GridSpec{bbox, cfg.cell_size_km, rows, cols}.km_per_deg_lon();
  const GridSpec grid = grid_segment(bbox, cfg.cell_size_km);
  urbancp::detail::require(grid.regions() == cfg.synth.regions, "synth: grid does not reproduce the region count");

  ensure_output_dir(cfg);
  io::write_tensor(cfg.tensor_path(), s.x);
  const fs::path poi_path = cfg.out() / "pois.csv";
  {
    std::ofstream os(poi_path);
    if (!os) throw IoError("cannot open " + poi_path.string() + " for writing");
    os << "lat,lon,category\n";
    std::mt19937_64 rng(cfg.synth.seed ^ 0x9e3779b97f4a7c15ULL);
    for (Index region = 0; region < grid.regions(); ++region) {
      const Index r = region / grid.n_cols, c = region % grid.n_cols;
      for (const auto& p : s.pois[static_cast<std::size_t>(region)]) {
        const double fy = 0.1 + 0.8 * urbancp::detail::mask_uniform(rng), fx = 0.1 + 0.8 * urbancp::detail::mask_uniform(rng);
        os << fmt(bbox.lat_min + (static_cast<double>(r) + fy) * cfg.cell_size_km / kKmPerDegLat) << ','
           << fmt(bbox.lon_min + (static_cast<double>(c) + fx) * cfg.cell_size_km / grid.km_per_deg_lon())
           << ',' << p.category << '\n';
      }
    }
  }
  SynthSummary out{s.x.dims(), (cfg.out() / "grid.conf").string()};
  std::ofstream os(out.grid_config);
  if (!os) throw IoError("cannot open " + out.grid_config + " for writing");
  os << "# grid matching the synthetic tensor\n"
     << "grid.lat_min = " << fmt(bbox.lat_min) << '\n'
     << "grid.lat_max = " << fmt(bbox.lat_max) << '\n'
     << "grid.lon_min = " << fmt(bbox.lon_min) << '\n'
     << "grid.lon_max = " << fmt(bbox.lon_max) << '\n'
     << "grid.cell_size_km = " << fmt(cfg.cell_size_km) << '\n'
     << "paths.pois = " << poi_path.string() << '\n';
  return out;
}

}  // namespace urbancp::cli
