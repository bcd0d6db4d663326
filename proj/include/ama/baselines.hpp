#pragma once

#include "ama/dataset.hpp"
#include "ama/linalg.hpp"
#include "ama/scorer.hpp"

namespace ama {

/// Train-set interaction count per item, the same for every user.
class PopScorer final : public Scorer {
 public:
  explicit PopScorer(const InteractionMatrix& train);

  Eigen::VectorXd score(std::span<const int> history, int user) const override;
  int items() const override { return static_cast<int>(counts_.size()); }

 private:
  Eigen::VectorXd counts_;
};

/// score = r V V^T with V the right singular vectors of the train matrix.
class PureSvdScorer final : public Scorer {
 public:
  PureSvdScorer(const InteractionMatrix& train, const SvdOptions& opt);
  explicit PureSvdScorer(Eigen::MatrixXd right) : right_(std::move(right)) {}

  Eigen::VectorXd score(std::span<const int> history, int user) const override;
  int items() const override { return static_cast<int>(right_.rows()); }

  const Eigen::MatrixXd& right() const { return right_; }

 private:
  Eigen::MatrixXd right_;
};

}  // namespace ama
