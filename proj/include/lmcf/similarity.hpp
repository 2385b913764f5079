#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "lmcf/error.hpp"
#include "lmcf/parallel.hpp"
#include "lmcf/rating_matrix.hpp"

namespace lmcf {

/// A similarity that is either a real value or UNDEFINED (stored as
/// -inf, so the natural double ordering already ranks UNDEFINED below
/// every real value in neighbor ranking).
class SimilarityValue {
 public:
  constexpr SimilarityValue() = default;  // undefined
  constexpr explicit SimilarityValue(double v) : raw_(v) {}

  static constexpr SimilarityValue undefined() { return SimilarityValue(); }

  constexpr bool defined() const {
    return raw_ != -std::numeric_limits<double>::infinity();
  }
  constexpr double value() const { return raw_; }  // -inf when undefined

  friend constexpr bool operator==(SimilarityValue a, SimilarityValue b) {
    return a.raw_ == b.raw_;
  }
  /// Ranking order: UNDEFINED < any real.
  friend constexpr bool operator<(SimilarityValue a, SimilarityValue b) {
    return a.raw_ < b.raw_;
  }

 private:
  double raw_ = -std::numeric_limits<double>::infinity();
};

enum class MeasureKind { kEuclidean, kCosine, kPearson };

inline const char* to_string(MeasureKind m) {
  switch (m) {
    case MeasureKind::kEuclidean: return "euclidean";
    case MeasureKind::kCosine: return "cosine";
    case MeasureKind::kPearson: return "pearson";
  }
  return "?";
}

inline MeasureKind measure_from_string(std::string_view s) {
  if (s == "euclidean") return MeasureKind::kEuclidean;
  if (s == "cosine") return MeasureKind::kCosine;
  if (s == "pearson") return MeasureKind::kPearson;
  throw Error("unknown measure '" + std::string(s) + "'");
}

namespace detail {

/// Linear merge over two sorted rows, calling fn(r_a, r_b) per co-rated
/// column in ascending column order.
template <typename Fn>
void for_each_corated(std::span<const Entry> ra, std::span<const Entry> rb,
                      Fn&& fn) {
  std::size_t i = 0, j = 0;
  while (i < ra.size() && j < rb.size()) {
    ++instrument::merge_steps;
    if (ra[i].id < rb[j].id) {
      ++i;
    } else if (rb[j].id < ra[i].id) {
      ++j;
    } else {
      fn(ra[i].value, rb[j].value);
      ++i;
      ++j;
    }
  }
}

}  // namespace detail

/// Cosine over raw co-rated ratings. More than one co-rated item is
/// required (strictly), otherwise UNDEFINED; a zero-norm co-rated
/// vector is UNDEFINED as well.
inline SimilarityValue cosine(const EntityView& view, entity_id a, entity_id b) {
  double z = 0.0, x = 0.0, y = 0.0;
  std::size_t n = 0;
  detail::for_each_corated(view.row(a), view.row(b), [&](double va, double vb) {
    z += va * vb;
    x += va * va;
    y += vb * vb;
    ++n;
  });
  if (n <= 1) return SimilarityValue::undefined();
  if (x == 0.0 || y == 0.0) return SimilarityValue::undefined();
  return SimilarityValue(z / (std::sqrt(x) * std::sqrt(y)));
}

/// Sample correlation of the co-rated rating pairs, each side centered
/// by its co-rated-subvector mean. UNDEFINED when fewer than two
/// co-rated items or either centered vector has zero variance.
inline SimilarityValue pearson(const EntityView& view, entity_id a, entity_id b) {
  double sum_a = 0.0, sum_b = 0.0;
  std::size_t n = 0;
  detail::for_each_corated(view.row(a), view.row(b), [&](double va, double vb) {
    sum_a += va;
    sum_b += vb;
    ++n;
  });
  if (n <= 1) return SimilarityValue::undefined();
  const double ma = sum_a / static_cast<double>(n);
  const double mb = sum_b / static_cast<double>(n);
  double num = 0.0, sx = 0.0, sy = 0.0;
  detail::for_each_corated(view.row(a), view.row(b), [&](double va, double vb) {
    const double da = va - ma;
    const double db = vb - mb;
    num += da * db;
    sx += da * da;
    sy += db * db;
  });
  if (sx == 0.0 || sy == 0.0) return SimilarityValue::undefined();
  return SimilarityValue(num / (std::sqrt(sx) * std::sqrt(sy)));
}

/// s = 1 / (1 + d), d the Euclidean distance over co-rated items. The
/// same more-than-one-co-rated guard applies.
inline SimilarityValue euclidean_similarity(const EntityView& view, entity_id a,
                                            entity_id b) {
  double ss = 0.0;
  std::size_t n = 0;
  detail::for_each_corated(view.row(a), view.row(b), [&](double va, double vb) {
    const double d = va - vb;
    ss += d * d;
    ++n;
  });
  if (n <= 1) return SimilarityValue::undefined();
  return SimilarityValue(1.0 / (1.0 + std::sqrt(ss)));
}

inline SimilarityValue similarity(const EntityView& view, MeasureKind m,
                                  entity_id a, entity_id b) {
  switch (m) {
    case MeasureKind::kEuclidean: return euclidean_similarity(view, a, b);
    case MeasureKind::kCosine: return cosine(view, a, b);
    case MeasureKind::kPearson: return pearson(view, a, b);
  }
  return SimilarityValue::undefined();
}

/// Dense rows x cols grid of SimilarityValue; default-initialized to
/// UNDEFINED.
class SimGrid {
 public:
  SimGrid() = default;
  SimGrid(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), cells_(rows * cols) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  SimilarityValue at(std::size_t r, std::size_t c) const {
    return cells_[r * cols_ + c];
  }
  SimilarityValue& at(std::size_t r, std::size_t c) {
    return cells_[r * cols_ + c];
  }
  std::span<const SimilarityValue> row(std::size_t r) const {
    return {cells_.data() + r * cols_, cols_};
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<SimilarityValue> cells_;
};

/// Full pairwise similarity matrix: S[a][b] = measure(a,b) for a != b,
/// UNDEFINED on the diagonal (self is never a neighbor). Row-parallel;
/// each output row is written by exactly one worker, and the per-pair
/// computation is symmetric down to the bit.
inline SimGrid similarity_matrix(const EntityView& view, MeasureKind m,
                                 unsigned threads = 1) {
  const std::size_t n = view.rows();
  SimGrid s(n, n);
  parallel_for(n, threads, [&](std::size_t a) {
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      s.at(a, b) = similarity(view, m, static_cast<entity_id>(a),
                              static_cast<entity_id>(b));
    }
  });
  return s;
}

}  // namespace lmcf
