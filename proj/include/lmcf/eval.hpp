#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lmcf/error.hpp"
#include "lmcf/ingest.hpp"
#include "lmcf/landmark.hpp"
#include "lmcf/predict.hpp"
#include "lmcf/rating_matrix.hpp"
#include "lmcf/similarity.hpp"

namespace lmcf {

enum class Algorithm { kLandmarkKnn, kBaselineKnn };

inline const char* to_string(Algorithm a) {
  return a == Algorithm::kLandmarkKnn ? "landmark" : "baseline";
}

inline Algorithm algorithm_from_string(std::string_view s) {
  if (s == "landmark") return Algorithm::kLandmarkKnn;
  if (s == "baseline") return Algorithm::kBaselineKnn;
  throw Error("unknown algorithm '" + std::string(s) + "'");
}

inline const char* to_string(Orientation o) {
  return o == Orientation::kUserBased ? "user" : "item";
}

inline Orientation orientation_from_string(std::string_view s) {
  if (s == "user") return Orientation::kUserBased;
  if (s == "item") return Orientation::kItemBased;
  throw Error("unknown orientation '" + std::string(s) + "'");
}

struct ExperimentConfig {
  std::string config_id;
  DatasetSpec dataset;
  Orientation orientation = Orientation::kUserBased;
  Algorithm algorithm = Algorithm::kLandmarkKnn;

  // landmark-knn only
  StrategyKind strategy = StrategyKind::kPopularity;
  std::uint32_t n_landmarks = 20;
  MeasureKind d1 = MeasureKind::kCosine;
  MeasureKind d2 = MeasureKind::kCosine;

  // baseline-knn only
  MeasureKind measure = MeasureKind::kCosine;

  std::uint32_t k = 13;
  std::uint32_t k_folds = 10;
  std::uint64_t seed = 1;
  std::uint32_t min_neighbors = 1;
  bool positive_only = true;
  unsigned threads = 0;  // 0 = hardware concurrency, 1 = timing mode

  void validate() const {
    if (k < 1) throw Error("k must be >= 1");
    if (k_folds < 2) throw Error("k_folds must be >= 2");
    if (algorithm == Algorithm::kLandmarkKnn && n_landmarks < 1)
      throw Error("landmark count must be >= 1");
  }

  PredictorConfig predictor() const {
    PredictorConfig p;
    p.k = k;
    p.min_neighbors = min_neighbors;
    p.positive_only = positive_only;
    return p;
  }
};

struct PhaseTimings {
  double selection_s = 0.0;
  double embedding_s = 0.0;
  double similarity_s = 0.0;
  double prediction_s = 0.0;
  double total_s() const {
    return selection_s + embedding_s + similarity_s + prediction_s;
  }
};

struct FoldReport {
  std::uint32_t fold = 0;
  double mae = 0.0;
  std::size_t n_test = 0;
  std::size_t eq1_count = 0;
  std::size_t user_mean_fallbacks = 0;
  std::size_t global_mean_fallbacks = 0;
  PhaseTimings timings;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<FoldReport> folds;
  double mean_mae = 0.0;
  double mean_total_s = 0.0;
  std::vector<std::string> warnings;
};

inline double mae(const std::vector<double>& predictions,
                  const std::vector<double>& truths) {
  if (predictions.empty() || predictions.size() != truths.size())
    throw Error("mae needs equal-length, nonempty inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    s += std::abs(predictions[i] - truths[i]);
  return s / static_cast<double>(predictions.size());
}

namespace detail {

class StopWatch {
 public:
  StopWatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

/// Per-fold landmark-selection sub-seed; one extra splitmix64 hop keeps
/// the fold streams uncorrelated with the fold-assignment stream.
inline std::uint64_t selection_seed(std::uint64_t seed, std::uint32_t fold) {
  return splitmix64(splitmix64(seed) + fold);
}

}  // namespace detail

/// Ten(ish)-fold cross validation of one configuration over pre-parsed
/// ratings. Phase timings bracket exactly landmark selection, embedding,
/// similarity-matrix construction, and prediction; parsing and matrix
/// building are not timed. Deterministic given the config seed; thread
/// count changes timings only.
inline RunReport run_experiment_on(const std::vector<Rating>& ratings,
                                   std::size_t num_users, std::size_t num_items,
                                   const ExperimentConfig& cfg) {
  cfg.validate();
  const FoldAssignment fa = kfold_split(ratings, cfg.k_folds, cfg.seed);

  RunReport report;
  report.config = cfg;
  const Orientation orient = cfg.orientation;

  double gm_only_mae_sum = 0.0;

  for (std::uint32_t f = 0; f < cfg.k_folds; ++f) {
    std::vector<Rating> train;
    std::vector<Rating> test;
    train.reserve(ratings.size());
    for (std::size_t i = 0; i < ratings.size(); ++i)
      (fa.fold_of[i] == f ? test : train).push_back(ratings[i]);

    const RatingMatrix matrix =
        build_matrix(train, num_users, num_items, cfg.dataset.scale);
    const EntityView view(matrix, orient);

    FoldReport fr;
    fr.fold = f;
    fr.n_test = test.size();

    SimGrid s;
    if (cfg.algorithm == Algorithm::kBaselineKnn) {
      detail::StopWatch sw;
      s = similarity_matrix(view, cfg.measure, cfg.threads);
      fr.timings.similarity_s = sw.seconds();
    } else {
      detail::StopWatch sel;
      const LandmarkSet landmarks =
          select_landmarks(view, cfg.strategy, cfg.n_landmarks,
                           detail::selection_seed(cfg.seed, f), cfg.d1);
      fr.timings.selection_s = sel.seconds();

      detail::StopWatch emb;
      const LandmarkEmbedding e =
          build_embedding(view, landmarks, cfg.d1, cfg.threads);
      fr.timings.embedding_s = emb.seconds();

      detail::StopWatch sim;
      s = landmark_similarity_matrix(e.h, cfg.d2, cfg.threads);
      fr.timings.similarity_s = sim.seconds();
    }

    std::vector<std::pair<entity_id, entity_id>> pairs;
    pairs.reserve(test.size());
    for (const Rating& r : test)
      pairs.emplace_back(orient == Orientation::kUserBased ? r.user : r.item,
                         orient == Orientation::kUserBased ? r.item : r.user);

    detail::StopWatch pw;
    const std::vector<Prediction> preds =
        predict_batch(view, s, pairs, cfg.predictor(), cfg.threads);
    fr.timings.prediction_s = pw.seconds();

    std::vector<double> values(preds.size()), truths(test.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      values[i] = preds[i].value;
      truths[i] = test[i].value;
      switch (preds[i].source) {
        case PredictionSource::kEq1: ++fr.eq1_count; break;
        case PredictionSource::kUserMean: ++fr.user_mean_fallbacks; break;
        case PredictionSource::kGlobalMean: ++fr.global_mean_fallbacks; break;
      }
    }
    fr.mae = mae(values, truths);

    // Sanity floor: a constant global-mean predictor should not beat the
    // configured algorithm; violations are reported, not asserted.
    {
      const double gm = std::isnan(matrix.global_mean())
                            ? 0.5 * (cfg.dataset.scale.min + cfg.dataset.scale.max)
                            : matrix.global_mean();
      double s_abs = 0.0;
      for (const Rating& r : test) s_abs += std::abs(gm - r.value);
      gm_only_mae_sum += s_abs / static_cast<double>(test.size());
    }

    report.folds.push_back(fr);
  }

  for (const FoldReport& fr : report.folds) {
    report.mean_mae += fr.mae;
    report.mean_total_s += fr.timings.total_s();
  }
  report.mean_mae /= static_cast<double>(report.folds.size());
  report.mean_total_s /= static_cast<double>(report.folds.size());

  const double gm_only_mae =
      gm_only_mae_sum / static_cast<double>(report.folds.size());
  if (report.mean_mae > gm_only_mae + 1e-12)
    report.warnings.push_back(
        "mean MAE " + std::to_string(report.mean_mae) +
        " exceeds the global-mean-only baseline " + std::to_string(gm_only_mae));

  return report;
}

inline RunReport run_experiment(const ExperimentConfig& cfg) {
  const ParsedRatings parsed = parse_ratings(cfg.dataset);
  return run_experiment_on(parsed.ratings, parsed.num_users(),
                           parsed.num_items(), cfg);
}

/// Runs configs in order with one shared parse per dataset path. All
/// configs are validated before any fold runs; the first failure aborts
/// with its index. Configs sharing (dataset, k_folds, seed) evaluate on
/// identical folds, so comparisons are paired.
inline std::vector<RunReport> sweep(const std::vector<ExperimentConfig>& configs) {
  if (configs.empty()) throw Error("sweep needs at least one config");
  for (std::size_t i = 0; i < configs.size(); ++i) {
    try {
      configs[i].validate();
    } catch (const Error& e) {
      throw Error("config " + std::to_string(i) + ": " + e.what());
    }
  }
  std::map<std::string, ParsedRatings> cache;
  std::vector<RunReport> out;
  out.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    try {
      auto it = cache.find(configs[i].dataset.path);
      if (it == cache.end())
        it = cache.emplace(configs[i].dataset.path,
                           parse_ratings(configs[i].dataset))
                 .first;
      const ParsedRatings& parsed = it->second;
      out.push_back(run_experiment_on(parsed.ratings, parsed.num_users(),
                                      parsed.num_items(), configs[i]));
    } catch (const Error& e) {
      throw Error("config " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

inline void write_fold_reports_csv(std::ostream& os,
                                   const std::vector<RunReport>& reports) {
  os << "config_id,fold,mae,n_test,selection_s,embedding_s,similarity_s,"
        "prediction_s\n";
  for (const RunReport& r : reports) {
    for (const FoldReport& fr : r.folds) {
      os << r.config.config_id << ',' << fr.fold << ',' << fr.mae << ','
         << fr.n_test << ',' << fr.timings.selection_s << ','
         << fr.timings.embedding_s << ',' << fr.timings.similarity_s << ','
         << fr.timings.prediction_s << '\n';
    }
  }
}

inline void write_summary_csv(std::ostream& os,
                              const std::vector<RunReport>& reports) {
  os << "config_id,algorithm,orientation,strategy,n_landmarks,d1,d2,measure,k,"
        "k_folds,seed,mean_mae,mean_total_s\n";
  for (const RunReport& r : reports) {
    const ExperimentConfig& c = r.config;
    os << c.config_id << ',' << to_string(c.algorithm) << ','
       << to_string(c.orientation) << ',';
    if (c.algorithm == Algorithm::kLandmarkKnn)
      os << to_string(c.strategy) << ',' << c.n_landmarks << ','
         << to_string(c.d1) << ',' << to_string(c.d2) << ",,";
    else
      os << ",,,," << to_string(c.measure) << ',';
    os << c.k << ',' << c.k_folds << ',' << c.seed << ',' << r.mean_mae << ','
       << r.mean_total_s << '\n';
  }
}

/// Declarative key=value experiment file ('#' comments). Landmark keys
/// (strategy, landmarks, d1, d2) and the baseline key (measure) are
/// mutually exclusive with the other algorithm, matching the config
/// invariant.
inline ExperimentConfig parse_experiment_config(std::istream& in) {
  ExperimentConfig cfg;
  bool saw_landmark_key = false;
  bool saw_baseline_key = false;
  bool saw_algorithm = false;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    const auto b = std::find_if(line.begin(), line.end(), notspace);
    if (b == line.end()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key=value", lineno);
    auto trim = [&](std::string s) {
      const auto first = std::find_if(s.begin(), s.end(), notspace);
      const auto last = std::find_if(s.rbegin(), s.rend(), notspace).base();
      return first < last ? std::string(first, last) : std::string();
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ParseError("expected key=value", lineno);

    if (key == "dataset") {
      cfg.dataset.path = value;
    } else if (key == "format") {
      cfg.dataset.format = file_format_from_string(value);
    } else if (key == "separator") {
      cfg.dataset.separator = value;
    } else if (key == "has_header") {
      cfg.dataset.has_header = (value == "true" || value == "1");
    } else if (key == "scale_min") {
      cfg.dataset.scale.min = std::stod(value);
    } else if (key == "scale_max") {
      cfg.dataset.scale.max = std::stod(value);
    } else if (key == "orientation") {
      cfg.orientation = orientation_from_string(value);
    } else if (key == "algorithm") {
      cfg.algorithm = algorithm_from_string(value);
      saw_algorithm = true;
    } else if (key == "strategy") {
      cfg.strategy = strategy_from_string(value);
      saw_landmark_key = true;
    } else if (key == "landmarks") {
      cfg.n_landmarks = static_cast<std::uint32_t>(std::stoul(value));
      saw_landmark_key = true;
    } else if (key == "d1") {
      cfg.d1 = measure_from_string(value);
      saw_landmark_key = true;
    } else if (key == "d2") {
      cfg.d2 = measure_from_string(value);
      saw_landmark_key = true;
    } else if (key == "measure") {
      cfg.measure = measure_from_string(value);
      saw_baseline_key = true;
    } else if (key == "k") {
      cfg.k = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "folds") {
      cfg.k_folds = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "seed") {
      cfg.seed = std::stoull(value);
    } else if (key == "min_neighbors") {
      cfg.min_neighbors = static_cast<std::uint32_t>(std::stoul(value));
    } else if (key == "positive_only") {
      cfg.positive_only = (value == "true" || value == "1");
    } else if (key == "threads") {
      cfg.threads = static_cast<unsigned>(std::stoul(value));
    } else if (key == "id") {
      cfg.config_id = value;
    } else {
      throw ParseError("unknown key '" + key + "'", lineno);
    }
  }
  if (!saw_algorithm)
    throw Error("config file must set algorithm = landmark | baseline");
  if (cfg.algorithm == Algorithm::kBaselineKnn && saw_landmark_key)
    throw Error("landmark keys are not valid for algorithm = baseline");
  if (cfg.algorithm == Algorithm::kLandmarkKnn && saw_baseline_key)
    throw Error("measure is not valid for algorithm = landmark");
  cfg.validate();
  return cfg;
}

}  // namespace lmcf
