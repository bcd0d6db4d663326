#pragma once

#include "ama/dataset.hpp"
#include "ama/scorer.hpp"

#include <Eigen/Dense>

#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace ama {

struct RankedList {
  int user = -1;
  std::vector<int> items;  // best first
};

/// Top-K items by descending score, ties by ascending item index, skipping
/// every item listed in `exclude` (each span sorted ascending).
RankedList rank_topk(const Eigen::VectorXd& scores, std::initializer_list<std::span<const int>> exclude, int k,
                     int user = -1);
RankedList rank_topk(const Eigen::VectorXd& scores, const std::vector<std::span<const int>>& exclude, int k,
                     int user = -1);

// Metrics take the ranked items and the sorted relevant set. `relevant` must
// be nonempty; callers skip users without relevant items.
double precision_at_k(std::span<const int> ranked, std::span<const int> relevant, int k);
double recall_at_k(std::span<const int> ranked, std::span<const int> relevant, int k);
/// Truncated average precision, normalized by min(k, |relevant|).
double average_precision_at_k(std::span<const int> ranked, std::span<const int> relevant, int k);
double r_precision(std::span<const int> ranked, std::span<const int> relevant);
/// Binary-gain NDCG over the first `cap` ranks; cap <= 0 means the whole list.
double ndcg(std::span<const int> ranked, std::span<const int> relevant, int cap = 0);

enum class SplitName { Validation, Test };

SplitName parse_split(const std::string& tag);
std::string split_name(SplitName split);

struct EvalOptions {
  std::vector<int> ks{5, 10, 20};
  int list_length = 50;  // recommended-list length scored by NDCG (at least max(ks))
};

struct MetricStat {
  double mean = 0.0;
  double ci = 0.0;  // 1.96 * standard error
};

struct RankingReport {
  std::vector<std::string> order;  // column order
  std::map<std::string, MetricStat> metrics;
  std::vector<int> ks;
  std::string split;
  std::string model_hash;
  int users = 0;

  const MetricStat& at(const std::string& name) const { return metrics.at(name); }
  std::string json() const;
  /// One header row and one value row, metrics in percent.
  std::string table(const std::string& label) const;
};

/// Per-user metric values in report column order.
struct UserMetrics {
  int user = -1;
  std::vector<double> values;
};

/// Column names for the given cutoffs: R-Precision, NDCG, MAP@K..., Precision@K..., Recall@K...
std::vector<std::string> metric_columns(const std::vector<int>& ks);

/// Ranks and scores one user. History items are excluded from the ranking.
UserMetrics evaluate_user(const Scorer& scorer, std::span<const int> history, std::span<const int> relevant,
                          int user, const EvalOptions& opt);

/// Averages over users with a nonempty relevant set. Validation uses the train
/// rows as history; test uses train plus validation.
RankingReport evaluate(const Scorer& scorer, const SplitDataset& data, SplitName split, const EvalOptions& opt = {});

/// Aggregates per-user records in the order given.
RankingReport summarize(const std::vector<UserMetrics>& rows, const std::vector<int>& ks);

}  // namespace ama
