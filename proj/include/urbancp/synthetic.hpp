#pragma once

// Planted traffic for experiments without real trajectories: a low-rank
// M x M x T tensor whose regions fall into blocks with shared flow profiles
// and matching POI mixes, and whose fibers repeat with a fixed period.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "urbancp/pipeline.hpp"
#include "urbancp/tensor.hpp"
#include "urbancp/urban.hpp"

namespace urbancp {

struct SyntheticSpec {
  Index regions = 20;
  Index horizon = 168;
  Index rank = 3;
  Index blocks = 4;
  Index period = 24;
  double noise = 0.05;       ///< Gaussian noise sd relative to the mean entry
  Index pois_per_region = 30;
  std::uint64_t seed = 1;
};

struct SyntheticTraffic {
  Tensor3 x;
  std::vector<Index> block;                     ///< block of each region
  std::vector<std::vector<PoiRecord>> pois;     ///< per region
};

inline const std::vector<std::string>& synthetic_poi_categories() {
  static const std::vector<std::string> labels{"food",      "retail", "office", "school",
                                               "leisure",   "health", "bus_station",
                                               "parking"};
  return labels;
}

inline SyntheticTraffic planted_traffic(const SyntheticSpec& s) {
  detail::require(s.regions >= 1 && s.horizon >= 2 && s.rank >= 1 && s.blocks >= 1,
                  "planted_traffic: sizes must be positive");
  detail::require(s.period >= 2 && s.period < s.horizon, "planted_traffic: period must be in [2, T)");
  std::mt19937_64 rng(s.seed);
  auto unif = [&rng] { return detail::mask_uniform(rng); };
  auto gauss = [&unif] {  // Box-Muller; std::normal_distribution varies across libraries
    const double u1 = 1.0 - unif();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * unif());
  };

  SyntheticTraffic out;
  out.block.resize(static_cast<std::size_t>(s.regions));
  for (Index i = 0; i < s.regions; ++i)
    out.block[static_cast<std::size_t>(i)] = i * s.blocks / s.regions;

  // One origin and one destination profile per block; regions jitter around it.
  Matrix origin(s.blocks, s.rank), dest(s.blocks, s.rank);
  for (Index n = 0; n < origin.size(); ++n) origin.data()[n] = 0.2 + unif();
  for (Index n = 0; n < dest.size(); ++n) dest.data()[n] = 0.2 + unif();
  FactorSet f{Matrix(s.regions, s.rank), Matrix(s.regions, s.rank), Matrix(s.horizon, s.rank)};
  for (Index i = 0; i < s.regions; ++i) {
    const Index b = out.block[static_cast<std::size_t>(i)];
    for (Index r = 0; r < s.rank; ++r) {
      f.A(i, r) = origin(b, r) * (0.9 + 0.2 * unif());
      f.B(i, r) = dest(b, r) * (0.9 + 0.2 * unif());
    }
  }
  for (Index r = 0; r < s.rank; ++r) {
    const double phase = 2.0 * std::numbers::pi * unif();
    for (Index k = 0; k < s.horizon; ++k)
      f.C(k, r) = 1.0 + 0.8 * std::sin(2.0 * std::numbers::pi * static_cast<double>(k) /
                                            static_cast<double>(s.period) +
                                        phase);
  }
  out.x = cp_reconstruct(f);
  if (s.noise > 0.0) {
    const double scale = s.noise * out.x.sum() / static_cast<double>(out.x.size());
    for (double& v : out.x.data()) v = std::max(0.0, v + scale * gauss());
  }

  // Each block favours its own subset of categories.
  const auto& labels = synthetic_poi_categories();
  const auto n_labels = static_cast<Index>(labels.size());
  std::vector<std::vector<double>> weights(static_cast<std::size_t>(s.blocks));
  for (Index b = 0; b < s.blocks; ++b) {
    auto& w = weights[static_cast<std::size_t>(b)];
    for (Index c = 0; c < n_labels; ++c) w.push_back((c % s.blocks == b) ? 4.0 : 0.05 + 0.2 * unif());
  }
  out.pois.resize(static_cast<std::size_t>(s.regions));
  for (Index i = 0; i < s.regions; ++i) {
    const auto& w = weights[static_cast<std::size_t>(out.block[static_cast<std::size_t>(i)])];
    for (Index n = 0; n < s.pois_per_region; ++n) {
      // discrete_distribution is implementation-defined; draw by inversion instead
      double u = unif() * std::accumulate(w.begin(), w.end(), 0.0);
      std::size_t c = 0;
      while (c + 1 < w.size() && u >= w[c]) u -= w[c++];
      out.pois[static_cast<std::size_t>(i)].push_back({0.0, 0.0, labels[c]});
    }
  }
  return out;
}

}  // namespace urbancp
