#pragma once

#include "ama/dataset.hpp"
#include "ama/scorer.hpp"

#include <span>
#include <string>
#include <vector>

namespace ama {

struct AttendedItem {
  int item = -1;
  double weight = 0.0;
};

struct Recommendation {
  int item = -1;
  double score = 0.0;
  int mode = 0;  // argmax mode, lowest index on ties
  Eigen::VectorXd mode_scores;
};

struct UserExplanation {
  int user = -1;
  std::vector<std::vector<AttendedItem>> attention;  // per mode, in history order
  std::vector<Recommendation> recommendations;
};

/// Attention over the full history and mode attribution of the top-K
/// history-excluded recommendations. Throws DataError on an empty history.
UserExplanation explain_user(const AmaScorer& model, std::span<const int> history, int k, int user = -1);

struct ModeUsageHistogram {
  std::vector<int> users_by_modes;  // index c-1 holds users whose top-K uses c distinct modes

  int total() const;
  std::string csv() const;
};

ModeUsageHistogram mode_usage(const AmaScorer& model, const InteractionMatrix& history, int k = 10);

struct ModeTopItem {
  int item = -1;
  double attention = 0.0;    // attention mass summed over users
  int popularity_rank = 0;   // 1-based rank by train count
  int popularity_count = 0;
};

struct ModeTopItems {
  std::vector<std::vector<ModeTopItem>> modes;

  std::string csv(const IdIndex& items) const;
};

/// Per mode, the N items with the largest attention mass summed over users.
ModeTopItems mode_top_items(const AmaScorer& model, const InteractionMatrix& history, int n = 10);

/// d x n matrix of summed attention per (mode, item).
Eigen::MatrixXd aggregated_attention(const AmaScorer& model, const InteractionMatrix& history);

std::string explanation_json(const UserExplanation& ex, const IdIndex& users, const IdIndex& items,
                             std::span<const int> hits = {});

/// Tripartite graph: history items -> modes -> recommendations. Edges from
/// history keep the `per_mode` highest weights of each mode.
std::string explanation_dot(const UserExplanation& ex, const IdIndex& items, std::span<const int> hits = {},
                            int per_mode = 5);

}  // namespace ama
