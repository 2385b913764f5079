#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lmcf/parallel.hpp"
#include "lmcf/rating_matrix.hpp"
#include "lmcf/similarity.hpp"

namespace lmcf {

struct PredictorConfig {
  std::uint32_t k = 13;
  std::uint32_t min_neighbors = 1;
  /// Keep only neighbors with similarity > 0 before ranking. Disabling
  /// this (sensitivity runs) admits negative weights into the weighted
  /// average; a near-zero denominator then falls back to the user mean.
  bool positive_only = true;
};

enum class PredictionSource { kEq1, kUserMean, kGlobalMean };

inline const char* to_string(PredictionSource s) {
  switch (s) {
    case PredictionSource::kEq1: return "eq1";
    case PredictionSource::kUserMean: return "user-mean";
    case PredictionSource::kGlobalMean: return "global-mean";
  }
  return "?";
}

struct Prediction {
  double value = 0.0;  // clamped to the rating scale
  PredictionSource source = PredictionSource::kGlobalMean;
  std::uint32_t neighbors_used = 0;
};

/// Mean-centered kNN rating prediction over any similarity matrix:
///
///   r_hat = mean(a) + sum_k s * (r - mean(neighbor)) / sum_k s
///
/// Neighbors are entities with a defined, positive similarity to `a`
/// that rated column `v` in the training view; the k most similar win,
/// ties broken by ascending id. Fallback ladder: no usable neighbors ->
/// row mean; row has no ratings -> global mean; empty matrix -> scale
/// midpoint. Total over valid ids, output always within scale.
inline Prediction predict(const EntityView& view, const SimGrid& s, entity_id a,
                          entity_id v, const PredictorConfig& cfg = {}) {
  const RatingScale scale = view.scale();
  const auto clamp = [&](double x) {
    return std::min(scale.max, std::max(scale.min, x));
  };

  struct Neighbor {
    double sim;
    entity_id id;
    double rating;
  };

  const double row_mean = view.row_mean(a);
  std::vector<Neighbor> cands;
  if (!std::isnan(row_mean)) {
    const auto raters = view.column(v);
    cands.reserve(raters.size());
    for (const Entry& e : raters) {
      if (e.id == a) continue;
      const SimilarityValue sv = s.at(a, e.id);
      if (!sv.defined()) continue;
      if (cfg.positive_only && !(sv.value() > 0.0)) continue;
      if (!cfg.positive_only && sv.value() == 0.0) continue;
      cands.push_back({sv.value(), e.id, e.value});
    }
  }

  const std::uint32_t need = std::max<std::uint32_t>(1, cfg.min_neighbors);
  if (cands.size() >= need) {
    std::sort(cands.begin(), cands.end(), [](const Neighbor& x, const Neighbor& y) {
      if (x.sim != y.sim) return x.sim > y.sim;
      return x.id < y.id;
    });
    if (cands.size() > cfg.k) cands.resize(cfg.k);
    double num = 0.0, den = 0.0;
    for (const Neighbor& nb : cands) {
      num += nb.sim * (nb.rating - view.row_mean(nb.id));
      den += nb.sim;
    }
    if (std::abs(den) > 1e-12) {
      Prediction p;
      p.value = clamp(row_mean + num / den);
      p.source = PredictionSource::kEq1;
      p.neighbors_used = static_cast<std::uint32_t>(cands.size());
      return p;
    }
  }

  if (!std::isnan(row_mean)) {
    Prediction p;
    p.value = clamp(row_mean);
    p.source = PredictionSource::kUserMean;
    return p;
  }
  Prediction p;
  const double gm = view.global_mean();
  p.value = clamp(std::isnan(gm) ? 0.5 * (scale.min + scale.max) : gm);
  p.source = PredictionSource::kGlobalMean;
  return p;
}

/// Elementwise predict over (row, column) pairs; output order matches
/// input order regardless of thread count.
inline std::vector<Prediction> predict_batch(
    const EntityView& view, const SimGrid& s,
    const std::vector<std::pair<entity_id, entity_id>>& pairs,
    const PredictorConfig& cfg = {}, unsigned threads = 1) {
  std::vector<Prediction> out(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    out[i] = predict(view, s, pairs[i].first, pairs[i].second, cfg);
  });
  return out;
}

}  // namespace lmcf
