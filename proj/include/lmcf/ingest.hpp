#pragma once

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lmcf/error.hpp"
#include "lmcf/rating_matrix.hpp"
#include "lmcf/rng.hpp"

namespace lmcf {

enum class FileFormat { kMl100k, kMl1m, kCsv };

inline const char* to_string(FileFormat f) {
  switch (f) {
    case FileFormat::kMl100k: return "ml-100k";
    case FileFormat::kMl1m: return "ml-1m";
    case FileFormat::kCsv: return "csv";
  }
  return "?";
}

inline FileFormat file_format_from_string(std::string_view s) {
  if (s == "ml-100k") return FileFormat::kMl100k;
  if (s == "ml-1m") return FileFormat::kMl1m;
  if (s == "csv") return FileFormat::kCsv;
  throw Error("unknown dataset format '" + std::string(s) + "'");
}

/// Column order for the csv format. Indices are 0-based field positions;
/// timestamp < 0 means the file has none.
struct ColumnOrder {
  int user = 0;
  int item = 1;
  int rating = 2;
  int timestamp = 3;
};

struct DatasetSpec {
  std::string path;
  FileFormat format = FileFormat::kMl100k;
  std::string separator;  // empty: derived from format
  bool has_header = false;
  ColumnOrder columns;
  RatingScale scale;

  std::string effective_separator() const {
    if (!separator.empty()) return separator;
    switch (format) {
      case FileFormat::kMl100k: return "\t";
      case FileFormat::kMl1m: return "::";
      case FileFormat::kCsv: return ",";
    }
    return ",";
  }
};

/// Raw-file ids are 1-based and possibly sparse (MovieLens item ids);
/// internal ids are dense 0-based in first-appearance order.
struct IdRemap {
  std::unordered_map<std::int64_t, entity_id> to_dense;
  std::vector<std::int64_t> to_raw;

  entity_id intern(std::int64_t raw) {
    auto it = to_dense.find(raw);
    if (it != to_dense.end()) return it->second;
    const auto id = static_cast<entity_id>(to_raw.size());
    to_dense.emplace(raw, id);
    to_raw.push_back(raw);
    return id;
  }
};

struct ParsedRatings {
  std::vector<Rating> ratings;
  IdRemap users;
  IdRemap items;
  std::size_t data_lines = 0;

  std::size_t num_users() const { return users.to_raw.size(); }
  std::size_t num_items() const { return items.to_raw.size(); }
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view line,
                                           std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
}

inline bool parse_i64(std::string_view s, std::int64_t& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

inline bool parse_f64(std::string_view s, double& out) {
  if (s.empty()) return false;
  std::string buf(s);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size();
}

}  // namespace detail

/// One Rating per data line; ids remapped densely in first-appearance
/// order. Malformed lines, non-numeric fields, and empty files are
/// errors carrying the 1-based line number.
inline ParsedRatings parse_ratings(const DatasetSpec& spec) {
  std::ifstream in(spec.path);
  if (!in) throw Error("cannot open '" + spec.path + "'");

  const std::string sep = spec.effective_separator();
  const ColumnOrder& col = spec.columns;
  const int max_col = std::max({col.user, col.item, col.rating,
                                col.timestamp < 0 ? 0 : col.timestamp});

  ParsedRatings out;
  std::string line;
  std::size_t lineno = 0;
  bool header_pending = spec.has_header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (line.empty()) throw ParseError("empty line", lineno);
    const auto fields = detail::split(line, sep);
    if (static_cast<int>(fields.size()) <= max_col)
      throw ParseError("expected at least " + std::to_string(max_col + 1) +
                           " fields, got " + std::to_string(fields.size()),
                       lineno);
    std::int64_t raw_user = 0, raw_item = 0, ts = 0;
    double value = 0.0;
    if (!detail::parse_i64(fields[col.user], raw_user))
      throw ParseError("non-numeric user id '" + std::string(fields[col.user]) + "'",
                       lineno);
    if (!detail::parse_i64(fields[col.item], raw_item))
      throw ParseError("non-numeric item id '" + std::string(fields[col.item]) + "'",
                       lineno);
    if (!detail::parse_f64(fields[col.rating], value))
      throw ParseError("non-numeric rating '" + std::string(fields[col.rating]) + "'",
                       lineno);
    if (col.timestamp >= 0 &&
        !detail::parse_i64(fields[col.timestamp], ts))
      throw ParseError("non-numeric timestamp '" +
                           std::string(fields[col.timestamp]) + "'",
                       lineno);
    Rating r;
    r.user = out.users.intern(raw_user);
    r.item = out.items.intern(raw_item);
    r.value = value;
    r.timestamp = ts;
    out.ratings.push_back(r);
    ++out.data_lines;
  }
  if (out.ratings.empty()) throw Error("no rating records in '" + spec.path + "'");
  return out;
}

/// Writes the csv layout back out (user,item,rating,timestamp). Used for
/// fold provenance and the parse round-trip property.
inline void write_ratings_csv(std::ostream& os, const std::vector<Rating>& ratings) {
  os << "user,item,rating,timestamp\n";
  for (const Rating& r : ratings) {
    os << r.user << ',' << r.item << ',' << r.value << ',' << r.timestamp
       << '\n';
  }
}

/// The m ratings with smallest timestamps, ties broken by original
/// record order (stable).
inline std::vector<Rating> chronological_cut(const std::vector<Rating>& ratings,
                                             std::size_t m) {
  if (m > ratings.size())
    throw Error("chronological cut of " + std::to_string(m) +
                " from only " + std::to_string(ratings.size()) + " ratings");
  std::vector<std::size_t> order(ratings.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ratings[a].timestamp < ratings[b].timestamp;
  });
  std::vector<Rating> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) out.push_back(ratings[order[i]]);
  return out;
}

struct FoldAssignment {
  std::vector<std::uint32_t> fold_of;  // per rating record
  std::uint32_t k_folds = 0;
  std::uint64_t seed = 0;

  std::size_t fold_size(std::uint32_t f) const {
    std::size_t n = 0;
    for (auto x : fold_of) n += (x == f);
    return n;
  }
};

/// Uniform random partition of rating records: a PCG32-seeded
/// Fisher-Yates permutation, then record perm[i] goes to fold i % k.
/// Fold sizes differ by at most one; identical (ratings, k, seed)
/// reproduce the assignment bit-for-bit.
inline FoldAssignment kfold_split(const std::vector<Rating>& ratings,
                                  std::uint32_t k_folds, std::uint64_t seed) {
  if (k_folds < 2) throw Error("k_folds must be >= 2");
  if (ratings.size() < k_folds)
    throw Error("fewer ratings (" + std::to_string(ratings.size()) +
                ") than folds (" + std::to_string(k_folds) + ")");
  std::vector<std::uint32_t> perm(ratings.size());
  std::iota(perm.begin(), perm.end(), 0u);
  Pcg32 rng(seed);
  shuffle(perm, rng);
  FoldAssignment fa;
  fa.k_folds = k_folds;
  fa.seed = seed;
  fa.fold_of.resize(ratings.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    fa.fold_of[perm[i]] = static_cast<std::uint32_t>(i % k_folds);
  return fa;
}

inline void write_folds_csv(std::ostream& os, const FoldAssignment& fa) {
  os << "record_index,fold\n";
  for (std::size_t i = 0; i < fa.fold_of.size(); ++i)
    os << i << ',' << fa.fold_of[i] << '\n';
}

}  // namespace lmcf
