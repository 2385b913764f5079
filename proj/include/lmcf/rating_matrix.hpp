#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lmcf/error.hpp"

namespace lmcf {

using entity_id = std::uint32_t;

struct RatingScale {
  double min = 1.0;
  double max = 5.0;
};

struct Rating {
  entity_id user = 0;
  entity_id item = 0;
  double value = 0.0;
  std::int64_t timestamp = 0;  // seconds; 0 when the source has none
};

/// One stored cell as seen from a row: `id` is the opposing entity.
struct Entry {
  entity_id id;
  double value;
};

enum class Orientation { kUserBased, kItemBased };

/// Sparse |U|x|P| rating store, indexed both user-major and item-major.
/// Immutable after build; rows and columns are sorted by opposing id so
/// co-rated extraction is a linear merge. All values are doubles.
class RatingMatrix {
 public:
  std::size_t num_users() const { return user_offsets_.size() - 1; }
  std::size_t num_items() const { return item_offsets_.size() - 1; }
  std::size_t num_ratings() const { return user_entries_.size(); }
  std::size_t duplicates_dropped() const { return duplicates_; }
  RatingScale scale() const { return scale_; }

  std::span<const Entry> user_row(entity_id u) const {
    return {user_entries_.data() + user_offsets_[u],
            user_offsets_[u + 1] - user_offsets_[u]};
  }
  std::span<const Entry> item_col(entity_id i) const {
    return {item_entries_.data() + item_offsets_[i],
            item_offsets_[i + 1] - item_offsets_[i]};
  }

  /// NaN when the user has no ratings.
  double user_mean(entity_id u) const { return user_means_[u]; }
  double item_mean(entity_id i) const { return item_means_[i]; }
  /// NaN when the matrix is empty.
  double global_mean() const { return global_mean_; }

  double sparsity_percent() const {
    const double cells =
        static_cast<double>(num_users()) * static_cast<double>(num_items());
    return cells == 0.0 ? 0.0 : 100.0 * static_cast<double>(num_ratings()) / cells;
  }

  friend RatingMatrix build_matrix(const std::vector<Rating>& ratings,
                                   std::size_t num_users, std::size_t num_items,
                                   RatingScale scale);

 private:
  std::vector<Entry> user_entries_;
  std::vector<std::size_t> user_offsets_;
  std::vector<Entry> item_entries_;
  std::vector<std::size_t> item_offsets_;
  std::vector<double> user_means_;
  std::vector<double> item_means_;
  double global_mean_ = std::numeric_limits<double>::quiet_NaN();
  RatingScale scale_;
  std::size_t duplicates_ = 0;
};

/// Builds both index directions and per-entity means. Duplicate
/// (user,item) pairs keep the last record and are counted, never an
/// error. Out-of-range ids and out-of-scale values are errors naming
/// the offending record.
inline RatingMatrix build_matrix(const std::vector<Rating>& ratings,
                                 std::size_t num_users, std::size_t num_items,
                                 RatingScale scale = RatingScale{}) {
  if (scale.min > scale.max) throw Error("rating scale has min > max");
  for (std::size_t r = 0; r < ratings.size(); ++r) {
    const Rating& rec = ratings[r];
    if (rec.user >= num_users)
      throw Error("record " + std::to_string(r) + ": user id " +
                  std::to_string(rec.user) + " out of range (num_users=" +
                  std::to_string(num_users) + ")");
    if (rec.item >= num_items)
      throw Error("record " + std::to_string(r) + ": item id " +
                  std::to_string(rec.item) + " out of range (num_items=" +
                  std::to_string(num_items) + ")");
    if (rec.value < scale.min || rec.value > scale.max)
      throw Error("record " + std::to_string(r) + ": rating " +
                  std::to_string(rec.value) + " outside scale [" +
                  std::to_string(scale.min) + ", " + std::to_string(scale.max) +
                  "]");
  }

  struct Cell {
    entity_id row, col;
    double value;
    std::size_t seq;
  };
  std::vector<Cell> cells;
  cells.reserve(ratings.size());
  for (std::size_t r = 0; r < ratings.size(); ++r)
    cells.push_back({ratings[r].user, ratings[r].item, ratings[r].value, r});

  // Last write wins: order by (row, col, seq) and keep the final record
  // of each (row, col) run.
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.row != b.row) return a.row < b.row;
    if (a.col != b.col) return a.col < b.col;
    return a.seq < b.seq;
  });
  std::vector<Cell> kept;
  kept.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const bool last_of_run = (i + 1 == cells.size()) ||
                             cells[i + 1].row != cells[i].row ||
                             cells[i + 1].col != cells[i].col;
    if (last_of_run) kept.push_back(cells[i]);
  }

  RatingMatrix m;
  m.scale_ = scale;
  m.duplicates_ = cells.size() - kept.size();

  m.user_offsets_.assign(num_users + 1, 0);
  m.item_offsets_.assign(num_items + 1, 0);
  for (const Cell& c : kept) {
    ++m.user_offsets_[c.row + 1];
    ++m.item_offsets_[c.col + 1];
  }
  for (std::size_t u = 0; u < num_users; ++u)
    m.user_offsets_[u + 1] += m.user_offsets_[u];
  for (std::size_t i = 0; i < num_items; ++i)
    m.item_offsets_[i + 1] += m.item_offsets_[i];

  m.user_entries_.resize(kept.size());
  m.item_entries_.resize(kept.size());
  {
    std::vector<std::size_t> ucur(m.user_offsets_.begin(),
                                  m.user_offsets_.end() - 1);
    for (const Cell& c : kept) m.user_entries_[ucur[c.row]++] = {c.col, c.value};
    // kept is (row, col)-sorted, so refilling column-major needs a pass
    // ordered by (col, row); resort a copy by that key.
    std::vector<Cell> by_col = kept;
    std::sort(by_col.begin(), by_col.end(), [](const Cell& a, const Cell& b) {
      if (a.col != b.col) return a.col < b.col;
      return a.row < b.row;
    });
    std::vector<std::size_t> icur(m.item_offsets_.begin(),
                                  m.item_offsets_.end() - 1);
    for (const Cell& c : by_col) m.item_entries_[icur[c.col]++] = {c.row, c.value};
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.user_means_.assign(num_users, nan);
  m.item_means_.assign(num_items, nan);
  double total = 0.0;
  for (std::size_t u = 0; u < num_users; ++u) {
    const auto row = m.user_row(static_cast<entity_id>(u));
    if (row.empty()) continue;
    double s = 0.0;
    for (const Entry& e : row) s += e.value;
    m.user_means_[u] = s / static_cast<double>(row.size());
    total += s;
  }
  for (std::size_t i = 0; i < num_items; ++i) {
    const auto col = m.item_col(static_cast<entity_id>(i));
    if (col.empty()) continue;
    double s = 0.0;
    for (const Entry& e : col) s += e.value;
    m.item_means_[i] = s / static_cast<double>(col.size());
  }
  if (!kept.empty()) m.global_mean_ = total / static_cast<double>(kept.size());
  return m;
}

/// Orientation-polymorphic access: the item-based view behaves exactly
/// as the transpose (rows(item view) == columns(user view)). O(1), no
/// data copy.
class EntityView {
 public:
  EntityView(const RatingMatrix& m, Orientation o) : m_(&m), o_(o) {}

  Orientation orientation() const { return o_; }
  const RatingMatrix& matrix() const { return *m_; }

  std::size_t rows() const {
    return o_ == Orientation::kUserBased ? m_->num_users() : m_->num_items();
  }
  std::size_t cols() const {
    return o_ == Orientation::kUserBased ? m_->num_items() : m_->num_users();
  }
  std::span<const Entry> row(entity_id r) const {
    return o_ == Orientation::kUserBased ? m_->user_row(r) : m_->item_col(r);
  }
  std::span<const Entry> column(entity_id c) const {
    return o_ == Orientation::kUserBased ? m_->item_col(c) : m_->user_row(c);
  }
  double row_mean(entity_id r) const {
    return o_ == Orientation::kUserBased ? m_->user_mean(r) : m_->item_mean(r);
  }
  std::size_t row_count(entity_id r) const { return row(r).size(); }
  double global_mean() const { return m_->global_mean(); }
  RatingScale scale() const { return m_->scale(); }

  EntityView transposed() const {
    return EntityView(*m_, o_ == Orientation::kUserBased
                               ? Orientation::kItemBased
                               : Orientation::kUserBased);
  }

 private:
  const RatingMatrix* m_;
  Orientation o_;
};

inline EntityView transpose_view(const RatingMatrix& m) {
  return EntityView(m, Orientation::kItemBased);
}

namespace instrument {
/// Element advances performed by co-rated merges since last reset.
/// Single-threaded accounting; the complexity tests run serial.
inline thread_local std::uint64_t merge_steps = 0;
inline void reset_merge_steps() { merge_steps = 0; }
}  // namespace instrument

struct CoratedPair {
  entity_id id;  // the co-rated column
  double a_value;
  double b_value;
};

/// Intersection of rows a and b by linear merge; sorted by column id.
inline std::vector<CoratedPair> corated_items(const EntityView& view,
                                              entity_id a, entity_id b) {
  const auto ra = view.row(a);
  const auto rb = view.row(b);
  std::vector<CoratedPair> out;
  std::size_t i = 0, j = 0;
  while (i < ra.size() && j < rb.size()) {
    ++instrument::merge_steps;
    if (ra[i].id < rb[j].id) {
      ++i;
    } else if (rb[j].id < ra[i].id) {
      ++j;
    } else {
      out.push_back({ra[i].id, ra[i].value, rb[j].value});
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace lmcf
