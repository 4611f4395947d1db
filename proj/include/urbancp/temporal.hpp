#pragma once

// Temporal context: pick the most regular mode-3 fiber by sample entropy,
// detect its period with a Lomb-Scargle periodogram refined by circular
// autocorrelation, and build the period-offset Toeplitz matrix.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "urbancp/mask.hpp"
#include "urbancp/tensor.hpp"

namespace urbancp {

/// A series sampled at integer bins 0..L-1, some of which may be missing.
struct TimeSeries {
  std::vector<double> values;
  std::vector<unsigned char> observed;

  static TimeSeries complete(std::vector<double> v) {
    TimeSeries ts;
    ts.observed.assign(v.size(), 1);
    ts.values = std::move(v);
    return ts;
  }

  std::size_t size() const noexcept { return values.size(); }
  bool is_observed(std::size_t i) const { return observed[i] != 0; }

  std::size_t observed_count() const {
    return static_cast<std::size_t>(std::count(observed.begin(), observed.end(), 1));
  }
  bool is_complete() const { return observed_count() == size(); }

  void validate() const {
    detail::require(values.size() == observed.size(),
                    "time series values and observation flags differ in length");
  }
};

struct SampEnParams {
  int m = 3;
  double th = 0.3;
};

namespace detail {

inline double observed_stddev(const TimeSeries& ts) {
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!ts.is_observed(i)) continue;
    sum += ts.values[i];
    ++n;
  }
  if (n == 0) return 0.0;
  const double mean = sum / static_cast<double>(n);
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts.is_observed(i)) sq += (ts.values[i] - mean) * (ts.values[i] - mean);
  return std::sqrt(sq / static_cast<double>(n));
}

// Template matching over a fixed set of start positions, each of which has
// m + 1 observed samples. The same templates are used at lengths m and m+1
// so the ratio of match counts is well defined (and >= 1).
inline std::optional<double> sampen_over_starts(const std::vector<double>& x,
                                                const std::vector<std::size_t>& starts,
                                                int m, double r) {
  const auto mm = static_cast<std::size_t>(m);
  std::size_t matches_m = 0, matches_m1 = 0;
  for (std::size_t a = 0; a < starts.size(); ++a) {
    for (std::size_t b = a + 1; b < starts.size(); ++b) {
      const std::size_t i = starts[a], j = starts[b];
      double d = 0.0;
      for (std::size_t k = 0; k < mm && d <= r; ++k) d = std::max(d, std::abs(x[i + k] - x[j + k]));
      if (d > r) continue;
      ++matches_m;
      if (std::abs(x[i + mm] - x[j + mm]) <= r) ++matches_m1;
    }
  }
  if (matches_m == 0 || matches_m1 == 0) return std::nullopt;
  return std::log(static_cast<double>(matches_m) / static_cast<double>(matches_m1));
}

inline std::vector<std::size_t> complete_template_starts(const TimeSeries& ts, int m) {
  std::vector<std::size_t> starts;
  const std::size_t len = static_cast<std::size_t>(m) + 1;
  if (ts.size() < len) return starts;
  // run = number of consecutive observed samples ending at index i
  std::size_t run = 0;
  std::vector<std::size_t> run_end(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    run = ts.is_observed(i) ? run + 1 : 0;
    run_end[i] = run;
  }
  for (std::size_t s = 0; s + len <= ts.size(); ++s)
    if (run_end[s + len - 1] >= len) starts.push_back(s);
  return starts;
}

inline void check_sampen_params(const SampEnParams& p) {
  require(p.m >= 1, "sample entropy: embedding length m must be >= 1");
  require(p.th > 0.0 && std::isfinite(p.th), "sample entropy: threshold th must be > 0");
}

}  // namespace detail

/// Sample entropy of a complete series. The tolerance is th times the
/// series standard deviation (i.e. th on the standardized series); distances
/// are Chebyshev and self-matches are excluded. nullopt when no template pair
/// matches at length m or m+1.
inline std::optional<double> sample_entropy(const TimeSeries& ts, const SampEnParams& p) {
  ts.validate();
  detail::check_sampen_params(p);
  detail::require(ts.is_complete(), "sample_entropy: series has missing values");
  detail::require(ts.size() > static_cast<std::size_t>(p.m) + 1,
                  "sample_entropy: series too short for embedding length");
  std::vector<std::size_t> starts(ts.size() - static_cast<std::size_t>(p.m));
  for (std::size_t s = 0; s < starts.size(); ++s) starts[s] = s;
  return detail::sampen_over_starts(ts.values, starts, p.m, p.th * detail::observed_stddev(ts));
}

/// Sample entropy restricted to templates without missing samples.
/// nullopt when fewer than two complete templates exist or no pair matches.
inline std::optional<double> keep_samp_en(const TimeSeries& ts, const SampEnParams& p) {
  ts.validate();
  detail::check_sampen_params(p);
  const auto starts = detail::complete_template_starts(ts, p.m);
  if (starts.size() < 2) return std::nullopt;
  return detail::sampen_over_starts(ts.values, starts, p.m, p.th * detail::observed_stddev(ts));
}

inline TimeSeries fiber_series(const Tensor3& y, const MaskTensor& w, Index i, Index j) {
  TimeSeries ts;
  const Index len = y.dim(2);
  ts.values.resize(static_cast<std::size_t>(len));
  ts.observed.resize(static_cast<std::size_t>(len));
  for (Index k = 0; k < len; ++k) {
    const bool obs = w.observed(i, j, k);
    ts.observed[static_cast<std::size_t>(k)] = obs ? 1 : 0;
    ts.values[static_cast<std::size_t>(k)] = obs ? y(i, j, k) : 0.0;
  }
  return ts;
}

struct RegularSeries {
  Index i = 0;
  Index j = 0;
  TimeSeries series;
  /// +infinity when the entropy is undefined for the chosen fiber.
  double sampen = std::numeric_limits<double>::infinity();
};

/// Mode-3 fiber with the least KeepSampEn; ties go to the lexicographically
/// smallest (i, j). Fibers with fewer than two complete templates are not
/// eligible; undefined entropies rank as +infinity. With `skip_constant`,
/// fibers whose observed samples are all equal are not eligible either.
inline RegularSeries most_regular_series(const Tensor3& y, const MaskTensor& w,
                                         const SampEnParams& p, bool skip_constant = false) {
  detail::require(y.dims() == w.dims(), "most_regular_series: mask dims differ from tensor");
  detail::check_sampen_params(p);
  std::optional<RegularSeries> best;
  for (Index i = 0; i < y.dim(0); ++i) {
    for (Index j = 0; j < y.dim(1); ++j) {
      TimeSeries ts = fiber_series(y, w, i, j);
      if (detail::complete_template_starts(ts, p.m).size() < 2) continue;
      if (skip_constant && detail::observed_stddev(ts) == 0.0) continue;
      const double e = keep_samp_en(ts, p).value_or(std::numeric_limits<double>::infinity());
      if (!best || e < best->sampen) best = RegularSeries{i, j, std::move(ts), e};
    }
  }
  if (!best) throw NoRegularSeriesError("no fiber has two complete templates of length m+1");
  return *std::move(best);
}

struct Periodogram {
  std::vector<double> frequencies;
  /// Lomb-Scargle power normalized by the variance of the observed values.
  std::vector<double> powers;
};

/// Lomb-Scargle power at each frequency for samples (times[i], values[i]).
/// Values are mean-centred; power is normalized by their variance so white
/// noise has unit mean power.
inline std::vector<double> lomb_scargle_power(std::span<const double> times,
                                              std::span<const double> values,
                                              std::span<const double> frequencies) {
  detail::require(times.size() == values.size(), "lomb_scargle: times/values length differ");
  detail::require(times.size() >= 2, "lomb_scargle: need at least two observed samples");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n;

  std::vector<double> out(frequencies.size(), 0.0);
  if (var == 0.0) return out;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  constexpr double eps = 1e-12;
  for (std::size_t f = 0; f < frequencies.size(); ++f) {
    const double w = two_pi * frequencies[f];
    double s2 = 0.0, c2 = 0.0;
    for (double t : times) {
      s2 += std::sin(2.0 * w * t);
      c2 += std::cos(2.0 * w * t);
    }
    const double tau = std::atan2(s2, c2) / (2.0 * w);
    double yc = 0.0, ys = 0.0, cc = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double arg = w * (times[i] - tau);
      const double c = std::cos(arg), s = std::sin(arg);
      const double y = values[i] - mean;
      yc += y * c;
      ys += y * s;
      cc += c * c;
      ss += s * s;
    }
    double p = 0.0;
    if (cc > eps * n) p += yc * yc / cc;
    if (ss > eps * n) p += ys * ys / ss;
    out[f] = 0.5 * p / var;
  }
  return out;
}

/// Periodogram over f_k = k / L, k = 1..floor(L/2), from observed samples only.
inline Periodogram lomb_scargle(const TimeSeries& ts) {
  ts.validate();
  std::vector<double> times, values;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!ts.is_observed(i)) continue;
    times.push_back(static_cast<double>(i));
    values.push_back(ts.values[i]);
  }
  detail::require(times.size() >= 2, "lomb_scargle: fewer than two observed samples");
  Periodogram pg;
  const std::size_t len = ts.size();
  for (std::size_t k = 1; k <= len / 2; ++k)
    pg.frequencies.push_back(static_cast<double>(k) / static_cast<double>(len));
  pg.powers = lomb_scargle_power(times, values, pg.frequencies);
  return pg;
}

/// False-alarm probability used to gate the periodogram peak.
inline constexpr double kPeriodFalseAlarm = 0.01;

/// Maps the dominant periodogram peak at frequency index k to the integer
/// period range [floor(L/k), ceil(L/(k-1))), clipped to [2, L). The peak must
/// clear both mean + 3*std of all powers and the level whose false-alarm
/// probability over all frequencies is kPeriodFalseAlarm. nullopt otherwise,
/// or when the clipped range is empty.
inline std::optional<std::pair<Index, Index>> dominant_period_range(const Periodogram& p,
                                                                    Index length) {
  detail::require(!p.powers.empty() && p.powers.size() == p.frequencies.size(),
                  "dominant_period_range: empty periodogram");
  detail::require(length >= 2, "dominant_period_range: series length must be >= 2");
  const auto peak = std::max_element(p.powers.begin(), p.powers.end());
  const double n = static_cast<double>(p.powers.size());
  double mean = 0.0;
  for (double v : p.powers) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : p.powers) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / n);
  const double fap_level = -std::log(1.0 - std::pow(1.0 - kPeriodFalseAlarm, 1.0 / n));
  if (*peak < mean + 3.0 * stddev || *peak < fap_level) return std::nullopt;

  const double f = p.frequencies[static_cast<std::size_t>(peak - p.powers.begin())];
  const Index k = static_cast<Index>(std::llround(f * static_cast<double>(length)));
  if (k < 1) return std::nullopt;
  Index t1 = length / k;
  Index t2 = k == 1 ? length : (length + k - 2) / (k - 1);
  t1 = std::max<Index>(t1, 2);
  t2 = std::min<Index>(t2, length);
  if (t1 >= t2) return std::nullopt;
  return std::pair{t1, t2};
}

/// Circular autocorrelation at lag theta over index pairs (i, i+theta mod L)
/// where both samples are observed, normalized by the number of such pairs.
inline double circular_autocorr(const TimeSeries& ts, Index theta) {
  ts.validate();
  const auto len = static_cast<Index>(ts.size());
  detail::require(theta >= 0 && theta < len, "circular_autocorr: lag out of range");
  double s = 0.0;
  std::size_t pairs = 0;
  for (Index i = 0; i < len; ++i) {
    const auto a = static_cast<std::size_t>(i);
    const auto b = static_cast<std::size_t>((i + theta) % len);
    if (!ts.is_observed(a) || !ts.is_observed(b)) continue;
    s += ts.values[a] * ts.values[b];
    ++pairs;
  }
  return pairs == 0 ? 0.0 : s / static_cast<double>(pairs);
}

/// Period t* of a series, or nullopt when the periodogram has no significant
/// peak or the autocorrelation over the candidate range is not concave.
inline std::optional<Index> detect_period(const TimeSeries& ts) {
  const auto range = dominant_period_range(lomb_scargle(ts), static_cast<Index>(ts.size()));
  if (!range) return std::nullopt;
  const auto [t1, t2] = *range;
  std::vector<double> corr;
  for (Index t = t1; t < t2; ++t) corr.push_back(circular_autocorr(ts, t));
  const Index best = t1 + static_cast<Index>(std::max_element(corr.begin(), corr.end()) - corr.begin());
  if (corr.size() < 3) return best;

  // least-squares parabola in centred lag coordinates
  const Index n = static_cast<Index>(corr.size());
  const double centre = 0.5 * static_cast<double>(t1 + t2 - 1);
  Matrix design(n, 3);
  Vector rhs(n);
  for (Index r = 0; r < n; ++r) {
    const double x = static_cast<double>(t1 + r) - centre;
    design(r, 0) = x * x;
    design(r, 1) = x;
    design(r, 2) = 1.0;
    rhs(r) = corr[static_cast<std::size_t>(r)];
  }
  const Vector coef = design.colPivHouseholderQr().solve(rhs);
  if (coef(0) < -1e-12) return best;
  return std::nullopt;
}

/// T x T matrix with ones on the diagonal and -1 on the period-th superdiagonal.
struct TemporalMatrix {
  Matrix values;
  Index period = 1;
};

inline TemporalMatrix toeplitz_temporal(Index length, Index period) {
  detail::require(period >= 1 && period < length,
                  "toeplitz_temporal: period must satisfy 1 <= t* < T (t*=" +
                      std::to_string(period) + ", T=" + std::to_string(length) + ")");
  TemporalMatrix out{Matrix::Identity(length, length), period};
  for (Index i = 0; i + period < length; ++i) out.values(i, i + period) = -1.0;
  return out;
}

/// Outcome of the full temporal analysis of an observed tensor.
struct TemporalContext {
  Index i = 0;
  Index j = 0;
  double sampen = std::numeric_limits<double>::infinity();
  Index period = 1;
  /// True when no period was detected and t* = 1 was used instead.
  bool fallback = true;
};

inline TemporalContext analyze_temporal(const Tensor3& y, const MaskTensor& w,
                                        const SampEnParams& p, bool skip_constant = false) {
  const RegularSeries reg = most_regular_series(y, w, p, skip_constant);
  TemporalContext ctx{reg.i, reg.j, reg.sampen, 1, true};
  if (reg.series.observed_count() >= 2) {
    if (auto t = detect_period(reg.series); t && *t < y.dim(2)) {
      ctx.period = *t;
      ctx.fallback = false;
    }
  }
  return ctx;
}

}  // namespace urbancp
