#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <string_view>
#include <vector>

#include "lmcf/error.hpp"
#include "lmcf/parallel.hpp"
#include "lmcf/rating_matrix.hpp"
#include "lmcf/rng.hpp"
#include "lmcf/similarity.hpp"

namespace lmcf {

enum class StrategyKind {
  kRandom,
  kDistOfRatings,
  kCoresets,
  kCoresetsRandom,
  kPopularity,
};

inline const char* to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::kRandom: return "random";
    case StrategyKind::kDistOfRatings: return "dist-of-ratings";
    case StrategyKind::kCoresets: return "coresets";
    case StrategyKind::kCoresetsRandom: return "coresets-random";
    case StrategyKind::kPopularity: return "popularity";
  }
  return "?";
}

inline StrategyKind strategy_from_string(std::string_view s) {
  if (s == "random") return StrategyKind::kRandom;
  if (s == "dist-of-ratings") return StrategyKind::kDistOfRatings;
  if (s == "coresets") return StrategyKind::kCoresets;
  if (s == "coresets-random") return StrategyKind::kCoresetsRandom;
  if (s == "popularity") return StrategyKind::kPopularity;
  throw Error("unknown strategy '" + std::string(s) + "'");
}

constexpr StrategyKind kAllStrategies[] = {
    StrategyKind::kRandom, StrategyKind::kDistOfRatings, StrategyKind::kCoresets,
    StrategyKind::kCoresetsRandom, StrategyKind::kPopularity};

struct LandmarkSet {
  std::vector<entity_id> ids;  // distinct, in draw order
  StrategyKind strategy = StrategyKind::kPopularity;
  std::uint64_t seed = 0;
  /// Coresets only: how many ids the short final round refilled from the
  /// previous round's candidates.
  std::uint32_t topped_up = 0;
};

namespace detail {

/// Draws `take` ids from the pool without replacement, probability
/// proportional to rating count; drawn ids are erased. A remaining pool
/// whose total weight is zero either degrades to uniform draws
/// (Coresets rounds) or is an error (Dist. of Ratings proper).
inline std::vector<entity_id> draw_weighted(std::vector<entity_id>& pool,
                                            const EntityView& view,
                                            std::size_t take, Pcg32& rng,
                                            bool uniform_on_zero_weight) {
  std::uint64_t total = 0;
  for (entity_id id : pool) total += view.row_count(id);
  std::vector<entity_id> out;
  out.reserve(take);
  while (out.size() < take) {
    std::size_t idx = 0;
    if (total == 0) {
      if (!uniform_on_zero_weight)
        throw Error("dist-of-ratings: fewer rows with ratings than landmarks");
      idx = rng.bounded(static_cast<std::uint32_t>(pool.size()));
    } else {
      const std::uint64_t t = rng.bounded64(total);
      std::uint64_t cum = 0;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        cum += view.row_count(pool[i]);
        if (t < cum) {
          idx = i;
          break;
        }
      }
    }
    out.push_back(pool[idx]);
    total -= view.row_count(pool[idx]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  return out;
}

inline std::vector<entity_id> draw_uniform(std::vector<entity_id>& pool,
                                           std::size_t take, Pcg32& rng) {
  std::vector<entity_id> out;
  out.reserve(take);
  while (out.size() < take) {
    const std::size_t idx = rng.bounded(static_cast<std::uint32_t>(pool.size()));
    out.push_back(pool[idx]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
  }
  return out;
}

struct ScoredRow {
  entity_id id;
  SimilarityValue score;  // max defined d1 similarity to the candidate set
};

/// Iterative candidate/prune loop shared by Coresets and CoresetsRandom.
/// Each round draws n candidates from the surviving pool, scores every
/// surviving row by its best similarity to the candidates (UNDEFINED
/// ranks lowest), and removes the ceil(half) most similar rows (ties by
/// ascending id). The landmarks are the final round's candidates; a
/// final pool shorter than n is topped up from the previous round's
/// candidates in descending removal-time score order.
inline LandmarkSet select_coresets(const EntityView& view, StrategyKind strategy,
                                   std::size_t n, std::uint64_t seed,
                                   MeasureKind d1) {
  const bool weighted = strategy == StrategyKind::kCoresets;
  Pcg32 rng(seed);
  std::vector<entity_id> pool(view.rows());
  std::iota(pool.begin(), pool.end(), 0u);
  std::vector<ScoredRow> prev;

  LandmarkSet out;
  out.strategy = strategy;
  out.seed = seed;

  const auto rank_desc = [](const ScoredRow& a, const ScoredRow& b) {
    if (!(a.score == b.score)) return b.score < a.score;
    return a.id < b.id;
  };

  while (true) {
    if (pool.size() < n) {
      std::vector<entity_id> tmp = pool;
      std::vector<entity_id> cands =
          weighted ? draw_weighted(tmp, view, tmp.size(), rng, true)
                   : draw_uniform(tmp, tmp.size(), rng);
      std::sort(prev.begin(), prev.end(), rank_desc);
      for (const ScoredRow& s : prev) {
        if (cands.size() == n) break;
        if (std::find(cands.begin(), cands.end(), s.id) == cands.end()) {
          cands.push_back(s.id);
          ++out.topped_up;
        }
      }
      out.ids = std::move(cands);
      return out;
    }

    std::vector<entity_id> tmp = pool;
    std::vector<entity_id> cands =
        weighted ? draw_weighted(tmp, view, n, rng, true)
                 : draw_uniform(tmp, n, rng);

    std::vector<ScoredRow> scored;
    scored.reserve(pool.size());
    for (entity_id id : pool) {
      SimilarityValue best;
      for (entity_id c : cands) {
        const SimilarityValue s = similarity(view, d1, id, c);
        if (best < s) best = s;
      }
      scored.push_back({id, best});
    }
    std::sort(scored.begin(), scored.end(), rank_desc);
    const std::size_t removed = (scored.size() + 1) / 2;

    std::vector<ScoredRow> cand_scores;
    cand_scores.reserve(n);
    for (const ScoredRow& s : scored)
      if (std::find(cands.begin(), cands.end(), s.id) != cands.end())
        cand_scores.push_back(s);

    pool.clear();
    for (std::size_t i = removed; i < scored.size(); ++i)
      pool.push_back(scored[i].id);
    std::sort(pool.begin(), pool.end());

    if (pool.empty()) {
      out.ids = std::move(cands);
      return out;
    }
    prev = std::move(cand_scores);
  }
}

}  // namespace detail

/// Picks n distinct rows of the view as landmarks. All randomized
/// strategies consume a PCG32 stream seeded with `seed`; Popularity is
/// deterministic regardless of seed.
inline LandmarkSet select_landmarks(const EntityView& view, StrategyKind strategy,
                                    std::size_t n, std::uint64_t seed,
                                    MeasureKind d1 = MeasureKind::kCosine) {
  const std::size_t rows = view.rows();
  if (n < 1) throw Error("landmark count must be >= 1");
  if (n > rows)
    throw Error("landmark count " + std::to_string(n) + " exceeds " +
                std::to_string(rows) + " rows");

  LandmarkSet out;
  out.strategy = strategy;
  out.seed = seed;

  switch (strategy) {
    case StrategyKind::kRandom: {
      Pcg32 rng(seed);
      std::vector<entity_id> pool(rows);
      std::iota(pool.begin(), pool.end(), 0u);
      out.ids = detail::draw_uniform(pool, n, rng);
      return out;
    }
    case StrategyKind::kDistOfRatings: {
      Pcg32 rng(seed);
      std::vector<entity_id> pool(rows);
      std::iota(pool.begin(), pool.end(), 0u);
      out.ids = detail::draw_weighted(pool, view, n, rng, false);
      return out;
    }
    case StrategyKind::kPopularity: {
      std::vector<entity_id> ids(rows);
      std::iota(ids.begin(), ids.end(), 0u);
      std::sort(ids.begin(), ids.end(), [&](entity_id a, entity_id b) {
        const std::size_t ca = view.row_count(a), cb = view.row_count(b);
        if (ca != cb) return ca > cb;
        return a < b;
      });
      ids.resize(n);
      out.ids = std::move(ids);
      return out;
    }
    case StrategyKind::kCoresets:
    case StrategyKind::kCoresetsRandom:
      return detail::select_coresets(view, strategy, n, seed, d1);
  }
  throw Error("unreachable strategy");
}

/// The landmark re-embedding H: row u holds d1(u, l) for every landmark
/// l, landmarks included among the rows.
struct LandmarkEmbedding {
  SimGrid h;  // view.rows() x landmarks.ids.size()
  LandmarkSet landmarks;
  MeasureKind d1 = MeasureKind::kCosine;
};

inline LandmarkEmbedding build_embedding(const EntityView& view,
                                         const LandmarkSet& landmarks,
                                         MeasureKind d1, unsigned threads = 1) {
  LandmarkEmbedding e;
  e.landmarks = landmarks;
  e.d1 = d1;
  e.h = SimGrid(view.rows(), landmarks.ids.size());
  parallel_for(view.rows(), threads, [&](std::size_t u) {
    for (std::size_t j = 0; j < landmarks.ids.size(); ++j)
      e.h.at(u, j) = similarity(view, d1, static_cast<entity_id>(u),
                                landmarks.ids[j]);
  });
  return e;
}

/// Cosine in landmark space, restricted to coordinates where both rows
/// are defined. No shared defined coordinate, or a zero restricted
/// norm, yields UNDEFINED. Unlike the rating-space measures a single
/// shared coordinate is enough.
inline SimilarityValue landmark_cosine(const SimGrid& h, entity_id a,
                                       entity_id b) {
  const auto ra = h.row(a);
  const auto rb = h.row(b);
  double z = 0.0, x = 0.0, y = 0.0;
  std::size_t n = 0;
  for (std::size_t l = 0; l < ra.size(); ++l) {
    if (!ra[l].defined() || !rb[l].defined()) continue;
    const double va = ra[l].value();
    const double vb = rb[l].value();
    z += va * vb;
    x += va * va;
    y += vb * vb;
    ++n;
  }
  if (n == 0 || x == 0.0 || y == 0.0) return SimilarityValue::undefined();
  return SimilarityValue(z / (std::sqrt(x) * std::sqrt(y)));
}

inline SimilarityValue landmark_euclidean(const SimGrid& h, entity_id a,
                                          entity_id b) {
  const auto ra = h.row(a);
  const auto rb = h.row(b);
  double ss = 0.0;
  std::size_t n = 0;
  for (std::size_t l = 0; l < ra.size(); ++l) {
    if (!ra[l].defined() || !rb[l].defined()) continue;
    const double d = ra[l].value() - rb[l].value();
    ss += d * d;
    ++n;
  }
  if (n == 0) return SimilarityValue::undefined();
  return SimilarityValue(1.0 / (1.0 + std::sqrt(ss)));
}

/// Pearson in landmark space, centered by the mean of the shared
/// defined coordinates; zero variance yields UNDEFINED (which covers
/// the single-coordinate case).
inline SimilarityValue landmark_pearson(const SimGrid& h, entity_id a,
                                        entity_id b) {
  const auto ra = h.row(a);
  const auto rb = h.row(b);
  double sum_a = 0.0, sum_b = 0.0;
  std::size_t n = 0;
  for (std::size_t l = 0; l < ra.size(); ++l) {
    if (!ra[l].defined() || !rb[l].defined()) continue;
    sum_a += ra[l].value();
    sum_b += rb[l].value();
    ++n;
  }
  if (n == 0) return SimilarityValue::undefined();
  const double ma = sum_a / static_cast<double>(n);
  const double mb = sum_b / static_cast<double>(n);
  double num = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t l = 0; l < ra.size(); ++l) {
    if (!ra[l].defined() || !rb[l].defined()) continue;
    const double da = ra[l].value() - ma;
    const double db = rb[l].value() - mb;
    num += da * db;
    sx += da * da;
    sy += db * db;
  }
  if (sx == 0.0 || sy == 0.0) return SimilarityValue::undefined();
  return SimilarityValue(num / (std::sqrt(sx) * std::sqrt(sy)));
}

inline SimilarityValue landmark_similarity(const SimGrid& h, MeasureKind m,
                                           entity_id a, entity_id b) {
  switch (m) {
    case MeasureKind::kEuclidean: return landmark_euclidean(h, a, b);
    case MeasureKind::kCosine: return landmark_cosine(h, a, b);
    case MeasureKind::kPearson: return landmark_pearson(h, a, b);
  }
  return SimilarityValue::undefined();
}

/// Pairwise similarity over the landmark representation; same shape
/// contract as similarity_matrix (symmetric, UNDEFINED diagonal).
inline SimGrid landmark_similarity_matrix(const SimGrid& h, MeasureKind d2,
                                          unsigned threads = 1) {
  const std::size_t n = h.rows();
  SimGrid s(n, n);
  parallel_for(n, threads, [&](std::size_t a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      s.at(a, b) = landmark_similarity(h, d2, static_cast<entity_id>(a),
                                       static_cast<entity_id>(b));
    }
  });
  return s;
}

/// Provenance export, one row per landmark: rank,entity_id,rating_count.
inline void write_landmarks_csv(std::ostream& os, const LandmarkSet& set,
                                const EntityView& view) {
  os << "rank,entity_id,rating_count\n";
  for (std::size_t i = 0; i < set.ids.size(); ++i)
    os << i << ',' << set.ids[i] << ',' << view.row_count(set.ids[i]) << '\n';
}

}  // namespace lmcf
