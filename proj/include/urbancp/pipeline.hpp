#pragma once

// Trajectories to traffic tensors: grid segmentation, time binning, the two
// tensor construction variants, corruption masks and evaluation metrics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "urbancp/mask.hpp"
#include "urbancp/tensor.hpp"
#include "urbancp/urban.hpp"

namespace urbancp {

/// km per degree of latitude, and of longitude at the equator, in the local
/// equirectangular projection.
inline constexpr double kKmPerDegLat = 110.574;
inline constexpr double kKmPerDegLon = 111.320;

struct BoundingBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;
};

struct GridSpec {
  BoundingBox bbox;
  double cell_size_km = 1.0;
  Index n_rows = 0;
  Index n_cols = 0;

  Index regions() const noexcept { return n_rows * n_cols; }
  double km_per_deg_lon() const {
    return kKmPerDegLon * std::cos(0.5 * (bbox.lat_min + bbox.lat_max) * std::numbers::pi / 180.0);
  }
};

/// Splits the box into square cells of `cell_size_km`; rows run along
/// latitude from lat_min, columns along longitude from lon_min. Region id is
/// row * n_cols + col.
inline GridSpec grid_segment(const BoundingBox& bbox, double cell_size_km) {
  detail::require(std::isfinite(bbox.lat_min) && std::isfinite(bbox.lat_max) &&
                      std::isfinite(bbox.lon_min) && std::isfinite(bbox.lon_max),
                  "grid_segment: bounding box must be finite");
  detail::require(bbox.lat_min < bbox.lat_max && bbox.lon_min < bbox.lon_max,
                  "grid_segment: inverted bounding box");
  detail::require(cell_size_km > 0.0 && std::isfinite(cell_size_km),
                  "grid_segment: cell size must be > 0");
  GridSpec g{bbox, cell_size_km, 0, 0};
  const double height = (bbox.lat_max - bbox.lat_min) * kKmPerDegLat;
  const double width = (bbox.lon_max - bbox.lon_min) * g.km_per_deg_lon();
  // tolerate round-off when the extent is an exact multiple of the cell size
  constexpr double slack = 1e-9;
  g.n_rows = std::max<Index>(1, static_cast<Index>(std::ceil(height / cell_size_km - slack)));
  g.n_cols = std::max<Index>(1, static_cast<Index>(std::ceil(width / cell_size_km - slack)));
  return g;
}

/// Containing cell, or nullopt outside the box. Points on the max edges
/// belong to the last row/column.
inline std::optional<Index> assign_region(double lat, double lon, const GridSpec& g) {
  if (!std::isfinite(lat) || !std::isfinite(lon)) return std::nullopt;
  const auto& b = g.bbox;
  if (lat < b.lat_min || lat > b.lat_max || lon < b.lon_min || lon > b.lon_max)
    return std::nullopt;
  const auto row = std::min<Index>(
      g.n_rows - 1,
      static_cast<Index>(std::floor((lat - b.lat_min) * kKmPerDegLat / g.cell_size_km)));
  const auto col = std::min<Index>(
      g.n_cols - 1,
      static_cast<Index>(std::floor((lon - b.lon_min) * g.km_per_deg_lon() / g.cell_size_km)));
  return row * g.n_cols + col;
}

struct TrajectoryPoint {
  std::string object_id;
  std::int64_t timestamp = 0;  ///< seconds since epoch
  double latitude = 0.0;
  double longitude = 0.0;
};

enum class TensorBuildMode { AllLocations, SourceToDestination };

struct TimeBinning {
  std::int64_t start = 0;        ///< epoch seconds of bin 0
  std::int64_t bin_seconds = 3600;
  Index horizon = 24;            ///< T
};

struct BuildStats {
  std::size_t points = 0;
  std::size_t dropped_outside = 0;
  std::size_t dropped_out_of_horizon = 0;
  std::size_t objects = 0;
};

/// Builds the M x M x T count tensor.
///
/// AllLocations: each object is reduced to one region per time bin (the
/// region of its last sample in that bin); every pair of consecutive bins
/// (k, k+1) with samples adds one to x(i, j, k). Samples in bin T may serve
/// as the destination of the k = T-1 transition. Bins without samples break
/// the chain; nothing is interpolated.
///
/// SourceToDestination: each object (trip) adds one to x(first region, last
/// region, departure bin).
///
/// Points outside the grid are dropped and counted.
inline Tensor3 build_tensor(std::span<const TrajectoryPoint> points, const GridSpec& grid,
                            const TimeBinning& time, TensorBuildMode mode,
                            BuildStats* stats = nullptr) {
  detail::require(time.bin_seconds > 0, "build_tensor: time bin must be positive");
  detail::require(time.horizon > 0, "build_tensor: horizon must be positive");
  detail::require(grid.regions() >= 1, "build_tensor: empty grid");
  const Index m = grid.regions();
  const Index horizon = time.horizon;
  Tensor3 x({m, m, horizon});
  BuildStats local;
  local.points = points.size();

  struct Sample {
    std::int64_t ts;
    Index region;
  };
  std::map<std::string, std::vector<Sample>> by_object;
  for (std::size_t n = 0; n < points.size(); ++n) {
    const auto& p = points[n];
    const auto region = assign_region(p.latitude, p.longitude, grid);
    if (!region) {
      ++local.dropped_outside;
      continue;
    }
    by_object[p.object_id].push_back({p.timestamp, *region});
  }
  local.objects = by_object.size();

  auto bin_of = [&](std::int64_t ts) -> std::int64_t {
    const std::int64_t d = ts - time.start;
    return d >= 0 ? d / time.bin_seconds : -1 - (-d - 1) / time.bin_seconds;
  };

  for (auto& [id, samples] : by_object) {
    std::stable_sort(samples.begin(), samples.end(),
                     [](const Sample& a, const Sample& b) { return a.ts < b.ts; });
    if (mode == TensorBuildMode::SourceToDestination) {
      const std::int64_t k = bin_of(samples.front().ts);
      if (k < 0 || k >= horizon) {
        ++local.dropped_out_of_horizon;
        continue;
      }
      x(samples.front().region, samples.back().region, static_cast<Index>(k)) += 1.0;
      continue;
    }
    // last region per bin, bins 0..T (bin T only as a destination)
    std::vector<std::pair<std::int64_t, Index>> per_bin;
    for (const auto& s : samples) {
      const std::int64_t k = bin_of(s.ts);
      if (k < 0 || k > horizon) {
        ++local.dropped_out_of_horizon;
        continue;
      }
      if (!per_bin.empty() && per_bin.back().first == k)
        per_bin.back().second = s.region;
      else
        per_bin.emplace_back(k, s.region);
    }
    for (std::size_t n = 1; n < per_bin.size(); ++n) {
      const auto [k0, r0] = per_bin[n - 1];
      const auto [k1, r1] = per_bin[n];
      if (k1 == k0 + 1) x(r0, r1, static_cast<Index>(k0)) += 1.0;
    }
  }
  if (stats) *stats = local;
  return x;
}

/// Groups POIs by containing region; POIs outside the grid are ignored.
inline std::vector<std::vector<PoiRecord>> pois_by_region(std::span<const PoiRecord> pois,
                                                          const GridSpec& grid) {
  std::vector<std::vector<PoiRecord>> out(static_cast<std::size_t>(grid.regions()));
  for (const auto& p : pois)
    if (auto r = assign_region(p.latitude, p.longitude, grid))
      out[static_cast<std::size_t>(*r)].push_back(p);
  return out;
}

namespace detail {
inline double mask_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
// Uniform integer in [0, n) without std::uniform_int_distribution, whose
// output is implementation-defined.
inline std::uint64_t mask_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do v = rng();
  while (v >= limit);
  return v % n;
}
}  // namespace detail

/// Each entry missing independently with probability `missing_rate`.
inline MaskTensor random_mask(const Dims& dims, double missing_rate, std::uint64_t seed) {
  detail::require(missing_rate >= 0.0 && missing_rate < 1.0,
                  "random_mask: missing rate must be in [0, 1)");
  Tensor3 w(dims, 1.0);
  std::mt19937_64 rng(seed);
  for (double& v : w.data()) v = detail::mask_uniform(rng) < missing_rate ? 0.0 : 1.0;
  return MaskTensor(std::move(w));
}

/// Picks floor(cell_fraction * I1 * I2) distinct (i, j) fibers and blanks a
/// window of `duration_bins` consecutive bins in each. The window start is
/// uniform over the starts that keep the window inside the horizon.
inline MaskTensor structured_mask(const Dims& dims, double cell_fraction, Index duration_bins,
                                  std::uint64_t seed) {
  detail::require(cell_fraction >= 0.0 && cell_fraction < 1.0,
                  "structured_mask: cell fraction must be in [0, 1)");
  detail::require(duration_bins >= 1 && duration_bins <= dims[2],
                  "structured_mask: duration must be in [1, T]");
  Tensor3 w(dims, 1.0);
  const auto cells = static_cast<std::uint64_t>(dims[0] * dims[1]);
  const auto chosen = static_cast<std::uint64_t>(
      std::floor(cell_fraction * static_cast<double>(cells)));
  std::vector<std::uint64_t> ids(cells);
  std::iota(ids.begin(), ids.end(), 0);
  std::mt19937_64 rng(seed);
  // partial Fisher-Yates
  for (std::uint64_t n = 0; n < chosen; ++n)
    std::swap(ids[n], ids[n + detail::mask_below(rng, cells - n)]);
  const auto starts = static_cast<std::uint64_t>(dims[2] - duration_bins + 1);
  for (std::uint64_t n = 0; n < chosen; ++n) {
    const Index i = static_cast<Index>(ids[n]) % dims[0];
    const Index j = static_cast<Index>(ids[n]) / dims[0];
    const auto k0 = static_cast<Index>(detail::mask_below(rng, starts));
    for (Index k = k0; k < k0 + duration_bins; ++k) w(i, j, k) = 0.0;
  }
  return MaskTensor(std::move(w));
}

/// ||x - x_hat||^2 / ||x||^2.
inline double relative_error(const Tensor3& x, const Tensor3& x_hat) {
  detail::require(x.dims() == x_hat.dims(), "relative_error: dimension mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double d = x.data()[n] - x_hat.data()[n];
    num += d * d;
    den += x.data()[n] * x.data()[n];
  }
  detail::require(den > 0.0, "relative_error: reference tensor is zero");
  return num / den;
}

/// -sum log(1 + x_i^2); never positive, decreasing as entries are added.
inline double sparsity_log(const Tensor3& x) {
  double s = 0.0;
  for (double v : x.data()) s -= std::log1p(v * v);
  return s;
}

}  // namespace urbancp
