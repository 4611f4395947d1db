#pragma once

// Urban context: POI diversity features per region and the cosine
// urban-similarity matrix built from them.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "urbancp/tensor.hpp"

namespace urbancp {

struct PoiRecord {
  double latitude = 0.0;
  double longitude = 0.0;
  std::string category;

  bool valid() const {
    return std::isfinite(latitude) && std::isfinite(longitude) && latitude >= -90.0 &&
           latitude <= 90.0 && longitude >= -180.0 && longitude <= 180.0 &&
           !category.empty();
  }
};

/// Proportions of the categories present in a region, ordered by label.
struct CategoryDistribution {
  std::vector<std::string> categories;
  std::vector<double> proportions;

  std::size_t richness() const noexcept { return proportions.size(); }
};

/// Rch, Sh, Ctr are the Hill numbers of order 0, 1, 2; Co is the share of
/// transport POIs.
struct UrbanFeatureVector {
  double rch = 0.0;
  double sh = 0.0;
  double ctr = 0.0;
  double co = 0.0;

  std::array<double, 4> as_array() const { return {rch, sh, ctr, co}; }
  bool is_zero() const { return rch == 0.0 && sh == 0.0 && ctr == 0.0 && co == 0.0; }
};

inline const std::set<std::string>& default_transport_categories() {
  static const std::set<std::string> labels{
      "transport",     "transportation", "bus_station", "subway_station",
      "train_station", "metro_station",  "parking",     "taxi_stand"};
  return labels;
}

/// Returns nullopt for a region without POIs.
inline std::optional<CategoryDistribution> category_distribution(
    std::span<const PoiRecord> pois) {
  if (pois.empty()) return std::nullopt;
  std::map<std::string, std::size_t> counts;
  for (const auto& p : pois) ++counts[p.category];
  CategoryDistribution d;
  const double total = static_cast<double>(pois.size());
  for (const auto& [label, n] : counts) {
    d.categories.push_back(label);
    d.proportions.push_back(static_cast<double>(n) / total);
  }
  return d;
}

/// Hill number of order q in {0, 1, 2}. q = 1 is the limit exp(Shannon).
inline double hill_number(const CategoryDistribution& d, int q) {
  detail::require(q == 0 || q == 1 || q == 2,
                  "hill_number: order must be 0, 1 or 2, got " + std::to_string(q));
  detail::require(!d.proportions.empty(), "hill_number: empty distribution");
  // All orders coincide with s for a uniform distribution; return it exactly
  // instead of exp(ln s) or 1/(s * s^-2) with rounding.
  const auto [lo, hi] = std::minmax_element(d.proportions.begin(), d.proportions.end());
  if (*lo == *hi) return static_cast<double>(d.richness());
  switch (q) {
    case 0:
      return static_cast<double>(d.richness());
    case 1: {
      double h = 0.0;
      for (double p : d.proportions)
        if (p > 0.0) h -= p * std::log(p);
      return std::exp(h);
    }
    default: {
      double s = 0.0;
      for (double p : d.proportions) s += p * p;
      return 1.0 / s;
    }
  }
}

/// Share of POIs whose category is a transport label; nullopt for no POIs.
inline std::optional<double> convenience(std::span<const PoiRecord> pois,
                                         const std::set<std::string>& transport_categories) {
  if (pois.empty()) return std::nullopt;
  std::size_t hits = 0;
  for (const auto& p : pois) hits += transport_categories.count(p.category);
  return static_cast<double>(hits) / static_cast<double>(pois.size());
}

/// Empty regions map to the zero vector.
inline UrbanFeatureVector feature_vector(std::span<const PoiRecord> pois,
                                         const std::set<std::string>& transport_categories) {
  const auto dist = category_distribution(pois);
  if (!dist) return {};
  return {hill_number(*dist, 0), hill_number(*dist, 1), hill_number(*dist, 2),
          *convenience(pois, transport_categories)};
}

/// Cosine similarity between every pair of feature vectors. Pairs that
/// involve a zero vector, including its own diagonal entry, are 0.
inline Matrix urban_similarity_matrix(std::span<const UrbanFeatureVector> features) {
  const Index m = static_cast<Index>(features.size());
  detail::require(m >= 1, "urban_similarity_matrix: need at least one region");
  std::vector<double> sq_norms(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    double s = 0.0;
    for (double c : features[i].as_array()) s += c * c;
    sq_norms[i] = s;
  }
  Matrix u = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    const auto vi = features[static_cast<std::size_t>(i)].as_array();
    for (Index j = i; j < m; ++j) {
      const double ni = sq_norms[static_cast<std::size_t>(i)];
      const double nj = sq_norms[static_cast<std::size_t>(j)];
      if (ni == 0.0 || nj == 0.0) continue;
      const auto vj = features[static_cast<std::size_t>(j)].as_array();
      double dot = 0.0;
      for (std::size_t c = 0; c < 4; ++c) dot += vi[c] * vj[c];
      const double cosine = i == j ? 1.0 : std::clamp(dot / std::sqrt(ni * nj), -1.0, 1.0);
      u(i, j) = cosine;
      u(j, i) = cosine;
    }
  }
  return u;
}

}  // namespace urbancp
