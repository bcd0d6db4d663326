#pragma once

#include "ama/errors.hpp"
#include "ama/linalg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ama {

struct AmaConfig {
  int h = 40;         // embedding size
  int d = 3;          // preference modes
  int kappa = 3;      // key/query size
  double alpha = 1.0;     // confidence weight on observed entries
  double lambda = 1e-5;   // decoder regularization
  double rho = 0.3;       // corruption rate
  int epochs = 300;
  std::uint64_t seed = 0;
  bool nce = false;   // reserved; NCE embedding initialization is not implemented

  void validate() const;
};

/// Shared encoder parameters. Item embeddings are row vectors, so both
/// projections act on the right.
struct EncoderParams {
  Eigen::MatrixXd key_proj;    // h x kappa
  Eigen::MatrixXd value_proj;  // h x h
  Eigen::MatrixXd queries;     // d x kappa, row l is the query of mode l
  Eigen::MatrixXd bias;        // d x h, row l is the bias of mode l
};

struct DecoderParams {
  Eigen::MatrixXd item_weights;  // n x h, row j decodes item j
};

struct AmaParameters {
  EncoderParams encoder;
  DecoderParams decoder;

  int items() const { return static_cast<int>(decoder.item_weights.rows()); }
  std::size_t count() const;

  static AmaParameters zeros(int n, int h, int d, int kappa);
  void add_scaled(const AmaParameters& other, double scale);
  bool all_finite() const;
  bool operator==(const AmaParameters& other) const;
};

/// n*h + h^2 + d*h + (h+d)*kappa.
std::size_t parameter_count(std::size_t n, std::size_t h, std::size_t d, std::size_t kappa);

/// Glorot-uniform key/value projections and queries; zero bias and decoder.
AmaParameters init_parameters(int n, const AmaConfig& cfg);

struct ItemProjections {
  Eigen::MatrixXd keys;    // n x kappa
  Eigen::MatrixXd values;  // n x h
};

ItemProjections keys_values(const ItemEmbeddings& emb, const EncoderParams& enc);

/// Masked scaled dot-product attention: softmax over the observed items of
/// q_l . k_j / sqrt(kappa), one row per mode. Columns follow `observed`.
/// Items outside `observed` carry no weight.
template <typename KeysDerived, typename QueriesDerived>
Eigen::MatrixXd attend(const Eigen::MatrixBase<KeysDerived>& keys, const Eigen::MatrixBase<QueriesDerived>& queries,
                       std::span<const int> observed, int kappa) {
  if (observed.empty()) throw DegenerateUserError("attention over an empty history");
  if (keys.cols() != queries.cols()) throw DimensionError("key and query sizes differ");
  const double scale = 1.0 / std::sqrt(static_cast<double>(kappa));
  const auto modes = queries.rows();
  const auto count = static_cast<Eigen::Index>(observed.size());
  Eigen::MatrixXd weights(modes, count);
  for (Eigen::Index t = 0; t < count; ++t)
    weights.col(t).noalias() = queries * keys.row(observed[t]).transpose() * scale;
  for (Eigen::Index l = 0; l < modes; ++l) {
    auto row = weights.row(l);
    const double peak = row.maxCoeff();
    row = (row.array() - peak).exp();
    row /= row.sum();
  }
  return weights;
}

/// U = A * values[observed] + bias.
template <typename ValuesDerived>
Eigen::MatrixXd encode(const Eigen::MatrixXd& attention, const Eigen::MatrixBase<ValuesDerived>& values,
                       std::span<const int> observed, const Eigen::MatrixXd& bias) {
  if (attention.cols() != static_cast<Eigen::Index>(observed.size()) || attention.rows() != bias.rows() ||
      values.cols() != bias.cols())
    throw DimensionError("encode: inconsistent shapes");
  Eigen::MatrixXd modes = bias;
  for (Eigen::Index t = 0; t < attention.cols(); ++t)
    modes.noalias() += attention.col(t) * values.row(observed[t]);
  return modes;
}

struct UserEncoding {
  Eigen::MatrixXd attention;  // d x |observed|
  Eigen::MatrixXd modes;      // d x h
  std::vector<int> observed;
};

UserEncoding encode_user(const ItemProjections& proj, const EncoderParams& enc, std::span<const int> observed);

struct Prediction {
  Eigen::VectorXd scores;
  std::vector<int> mode_of;
};

/// d x n matrix of per-mode scores u_l . s_j.
Eigen::MatrixXd mode_scores(const Eigen::MatrixXd& modes, const DecoderParams& dec);

/// Max over modes per item; ties go to the lowest mode index.
Prediction maxout(const Eigen::MatrixXd& per_mode_scores);
Prediction decode_maxout(const Eigen::MatrixXd& modes, const DecoderParams& dec);

/// c_j = 1 + alpha * ln(1 + r_j).
Eigen::VectorXd confidence_weights(const Eigen::VectorXd& row, double alpha);

/// Drops each observed index independently with probability rho.
std::vector<int> corrupt(std::span<const int> observed, double rho, std::mt19937_64& rng);

/// One user's training example: clean target history and the (possibly
/// corrupted) history that masks the attention.
struct UserExample {
  std::span<const int> target;
  std::span<const int> input;
};

struct LossResult {
  double objective = 0.0;
  Prediction prediction;
};

/// Weighted squared error against the clean row plus lambda * ||S||_F^2.
/// Returns nullopt when the input history is empty (the user is skipped).
std::optional<LossResult> loss(const UserExample& ex, const AmaParameters& params, const ItemEmbeddings& emb,
                               const AmaConfig& cfg);

/// Per-user gradient in factored form. The decoder gradient is
/// residual_j * modes.row(mode_of[j]) + 2 lambda S_j, materialized on demand.
struct UserGradient {
  double objective = 0.0;
  EncoderParams encoder;
  Eigen::VectorXd residual;  // 2 c_j (rhat_j - r_j)
  std::vector<int> mode_of;
  Eigen::MatrixXd modes;

  /// Adds the data term of dL/dS to `grad` (regularizer excluded).
  void accumulate_decoder(Eigen::MatrixXd& grad) const;
  AmaParameters materialize(const AmaParameters& params, double lambda) const;
};

std::optional<UserGradient> user_gradient(const UserExample& ex, const AmaParameters& params,
                                          const ItemEmbeddings& emb, const ItemProjections& proj,
                                          const AmaConfig& cfg);

/// Exact gradient of loss() with respect to {W_k, W_v, Q, B, S}.
std::optional<AmaParameters> gradients(const UserExample& ex, const AmaParameters& params,
                                       const ItemEmbeddings& emb, const AmaConfig& cfg);

struct ModelMetadata {
  AmaConfig config;
  std::string item_index_hash;
  std::string embeddings;  // path of the embedding file, relative to the model
};

/// Binary layout: "AMAM", u32 version, u64 n, h, d, kappa, then W_k, W_v, Q,
/// B, S as row-major f64. The JSON sidecar lives at `path + ".json"`.
void save_model(const std::string& path, const AmaParameters& params, const ModelMetadata& meta);
AmaParameters load_model(const std::string& path, ModelMetadata* meta = nullptr);

}  // namespace ama
