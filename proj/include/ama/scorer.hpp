#pragma once

#include "ama/linalg.hpp"
#include "ama/model.hpp"

#include <Eigen/Dense>

#include <span>

namespace ama {

/// Maps a user's history (sorted item indices) to one score per item.
/// Implementations are immutable after construction.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual Eigen::VectorXd score(std::span<const int> history, int user) const = 0;
  virtual int items() const = 0;
};

class AmaScorer final : public Scorer {
 public:
  AmaScorer(AmaParameters params, ItemEmbeddings emb);

  Eigen::VectorXd score(std::span<const int> history, int user) const override;
  int items() const override { return params_.items(); }

  /// Full forward pass: attention, modes, and maxout prediction.
  UserEncoding encode(std::span<const int> history) const;
  Prediction predict(std::span<const int> history) const;

  const AmaParameters& params() const { return params_; }
  const ItemEmbeddings& embeddings() const { return emb_; }
  const ItemProjections& projections() const { return proj_; }

 private:
  AmaParameters params_;
  ItemEmbeddings emb_;
  ItemProjections proj_;
};

}  // namespace ama
