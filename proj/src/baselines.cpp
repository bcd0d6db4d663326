#include "ama/baselines.hpp"

#include "ama/errors.hpp"

namespace ama {

PopScorer::PopScorer(const InteractionMatrix& train) : counts_(train.column_counts()) {
  if (train.nnz() == 0) throw DataError("popularity baseline needs a nonempty train matrix");
}

Eigen::VectorXd PopScorer::score(std::span<const int>, int) const { return counts_; }

PureSvdScorer::PureSvdScorer(const InteractionMatrix& train, const SvdOptions& opt)
    : right_(randomized_svd(train, opt).right) {}

Eigen::VectorXd PureSvdScorer::score(std::span<const int> history, int) const {
  Eigen::VectorXd projected = Eigen::VectorXd::Zero(right_.cols());
  for (int j : history) projected += right_.row(j).transpose();
  return right_ * projected;
}

AmaScorer::AmaScorer(AmaParameters params, ItemEmbeddings emb)
    : params_(std::move(params)), emb_(std::move(emb)), proj_(keys_values(emb_, params_.encoder)) {
  if (emb_.items() != params_.items()) throw DimensionError("embedding rows do not match model item count");
}

UserEncoding AmaScorer::encode(std::span<const int> history) const {
  return encode_user(proj_, params_.encoder, history);
}

Prediction AmaScorer::predict(std::span<const int> history) const {
  return decode_maxout(encode(history).modes, params_.decoder);
}

Eigen::VectorXd AmaScorer::score(std::span<const int> history, int) const { return predict(history).scores; }

}  // namespace ama
