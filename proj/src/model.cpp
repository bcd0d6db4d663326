#include "ama/model.hpp"

#include "ama/util.hpp"
#include "binary_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace ama {

void AmaConfig::validate() const {
  if (h < 1) throw ConfigError("h must be >= 1");
  if (d < 1) throw ConfigError("d must be >= 1");
  if (kappa < 1) throw ConfigError("kappa must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho must lie in [0, 1]");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (nce) throw ConfigError("NCE item-embedding initialization is not supported");
}

std::size_t parameter_count(std::size_t n, std::size_t h, std::size_t d, std::size_t kappa) {
  return n * h + h * h + d * h + (h + d) * kappa;
}

std::size_t AmaParameters::count() const {
  return static_cast<std::size_t>(encoder.key_proj.size() + encoder.value_proj.size() + encoder.queries.size() +
                                  encoder.bias.size() + decoder.item_weights.size());
}

AmaParameters AmaParameters::zeros(int n, int h, int d, int kappa) {
  AmaParameters p;
  p.encoder.key_proj = Eigen::MatrixXd::Zero(h, kappa);
  p.encoder.value_proj = Eigen::MatrixXd::Zero(h, h);
  p.encoder.queries = Eigen::MatrixXd::Zero(d, kappa);
  p.encoder.bias = Eigen::MatrixXd::Zero(d, h);
  p.decoder.item_weights = Eigen::MatrixXd::Zero(n, h);
  return p;
}

void AmaParameters::add_scaled(const AmaParameters& other, double scale) {
  encoder.key_proj += scale * other.encoder.key_proj;
  encoder.value_proj += scale * other.encoder.value_proj;
  encoder.queries += scale * other.encoder.queries;
  encoder.bias += scale * other.encoder.bias;
  decoder.item_weights += scale * other.decoder.item_weights;
}

bool AmaParameters::all_finite() const {
  return encoder.key_proj.allFinite() && encoder.value_proj.allFinite() && encoder.queries.allFinite() &&
         encoder.bias.allFinite() && decoder.item_weights.allFinite();
}

bool AmaParameters::operator==(const AmaParameters& o) const {
  const auto same = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
  };
  return same(encoder.key_proj, o.encoder.key_proj) && same(encoder.value_proj, o.encoder.value_proj) &&
         same(encoder.queries, o.encoder.queries) && same(encoder.bias, o.encoder.bias) &&
         same(decoder.item_weights, o.decoder.item_weights);
}

AmaParameters init_parameters(int n, const AmaConfig& cfg) {
  cfg.validate();
  auto p = AmaParameters::zeros(n, cfg.h, cfg.d, cfg.kappa);
  std::mt19937_64 rng(mix_seed(cfg.seed, 0x1217));
  const auto glorot = [&rng](Eigen::MatrixXd& m, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(rng);
  };
  glorot(p.encoder.key_proj, cfg.h, cfg.kappa);
  glorot(p.encoder.value_proj, cfg.h, cfg.h);
  glorot(p.encoder.queries, cfg.kappa, cfg.d);
  return p;
}

ItemProjections keys_values(const ItemEmbeddings& emb, const EncoderParams& enc) {
  if (emb.dim() != enc.key_proj.rows() || emb.dim() != enc.value_proj.rows() ||
      enc.value_proj.rows() != enc.value_proj.cols())
    throw DimensionError("item embedding size does not match encoder projections");
  return {emb.values * enc.key_proj, emb.values * enc.value_proj};
}

UserEncoding encode_user(const ItemProjections& proj, const EncoderParams& enc, std::span<const int> observed) {
  UserEncoding out;
  out.observed.assign(observed.begin(), observed.end());
  out.attention = attend(proj.keys, enc.queries, observed, static_cast<int>(enc.queries.cols()));
  out.modes = encode(out.attention, proj.values, observed, enc.bias);
  return out;
}

Eigen::MatrixXd mode_scores(const Eigen::MatrixXd& modes, const DecoderParams& dec) {
  if (modes.cols() != dec.item_weights.cols()) throw DimensionError("mode size does not match decoder");
  return modes * dec.item_weights.transpose();
}

Prediction maxout(const Eigen::MatrixXd& per_mode) {
  Prediction p;
  const auto n = per_mode.cols();
  p.scores.resize(n);
  p.mode_of.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    int best = 0;
    for (Eigen::Index l = 1; l < per_mode.rows(); ++l)
      if (per_mode(l, j) > per_mode(best, j)) best = static_cast<int>(l);
    p.scores[j] = per_mode(best, j);
    p.mode_of[j] = best;
  }
  return p;
}

Prediction decode_maxout(const Eigen::MatrixXd& modes, const DecoderParams& dec) {
  return maxout(mode_scores(modes, dec));
}

Eigen::VectorXd confidence_weights(const Eigen::VectorXd& row, double alpha) {
  return (1.0 + alpha * row.array().log1p()).matrix();
}

std::vector<int> corrupt(std::span<const int> observed, double rho, std::mt19937_64& rng) {
  std::bernoulli_distribution drop(rho);
  std::vector<int> kept;
  kept.reserve(observed.size());
  for (int j : observed)
    if (!drop(rng)) kept.push_back(j);
  return kept;
}

namespace {

struct Forward {
  UserEncoding enc;
  Prediction prediction;
  Eigen::VectorXd target;
  Eigen::VectorXd weights;
  double objective = 0.0;
};

Forward forward(const UserExample& ex, const AmaParameters& params, const ItemProjections& proj,
                const AmaConfig& cfg) {
  Forward f;
  f.enc = encode_user(proj, params.encoder, ex.input);
  f.prediction = decode_maxout(f.enc.modes, params.decoder);
  const auto n = params.decoder.item_weights.rows();
  f.target = Eigen::VectorXd::Zero(n);
  for (int j : ex.target) f.target[j] = 1.0;
  f.weights = confidence_weights(f.target, cfg.alpha);
  const Eigen::ArrayXd err = f.target.array() - f.prediction.scores.array();
  f.objective = (f.weights.array() * err.square()).sum() + cfg.lambda * params.decoder.item_weights.squaredNorm();
  return f;
}

}  // namespace

std::optional<LossResult> loss(const UserExample& ex, const AmaParameters& params, const ItemEmbeddings& emb,
                               const AmaConfig& cfg) {
  if (ex.input.empty()) return std::nullopt;
  auto f = forward(ex, params, keys_values(emb, params.encoder), cfg);
  return LossResult{f.objective, std::move(f.prediction)};
}

void UserGradient::accumulate_decoder(Eigen::MatrixXd& grad) const {
  for (Eigen::Index j = 0; j < residual.size(); ++j) {
    const double g = residual[j];
    if (g != 0.0) grad.row(j).noalias() += g * modes.row(mode_of[j]);
  }
}

AmaParameters UserGradient::materialize(const AmaParameters& params, double lambda) const {
  AmaParameters g;
  g.encoder = encoder;
  g.decoder.item_weights = 2.0 * lambda * params.decoder.item_weights;
  accumulate_decoder(g.decoder.item_weights);
  return g;
}

std::optional<UserGradient> user_gradient(const UserExample& ex, const AmaParameters& params,
                                          const ItemEmbeddings& emb, const ItemProjections& proj,
                                          const AmaConfig& cfg) {
  if (ex.input.empty()) return std::nullopt;
  const auto f = forward(ex, params, proj, cfg);
  const auto& enc = params.encoder;
  const auto& S = params.decoder.item_weights;
  const auto d = enc.queries.rows();
  const auto h = enc.bias.cols();
  const auto count = static_cast<Eigen::Index>(ex.input.size());

  UserGradient g;
  g.objective = f.objective;
  g.residual = (2.0 * f.weights.array() * (f.prediction.scores - f.target).array()).matrix();
  g.mode_of = f.prediction.mode_of;
  g.modes = f.enc.modes;

  // dL/dU: each item routes its residual to its argmax mode only.
  Eigen::MatrixXd d_modes = Eigen::MatrixXd::Zero(d, h);
  for (Eigen::Index j = 0; j < S.rows(); ++j) {
    const double r = g.residual[j];
    if (r != 0.0) d_modes.row(g.mode_of[j]).noalias() += r * S.row(j);
  }

  Eigen::MatrixXd emb_obs(count, h);
  Eigen::MatrixXd keys_obs(count, enc.key_proj.cols());
  Eigen::MatrixXd values_obs(count, h);
  for (Eigen::Index t = 0; t < count; ++t) {
    emb_obs.row(t) = emb.values.row(ex.input[t]);
    keys_obs.row(t) = proj.keys.row(ex.input[t]);
    values_obs.row(t) = proj.values.row(ex.input[t]);
  }
  const Eigen::MatrixXd& A = f.enc.attention;

  const Eigen::MatrixXd d_attn = d_modes * values_obs.transpose();  // d x count
  const Eigen::MatrixXd d_values = A.transpose() * d_modes;         // count x h
  Eigen::MatrixXd d_logits(d, count);
  for (Eigen::Index l = 0; l < d; ++l) {
    const double inner = A.row(l).dot(d_attn.row(l));
    d_logits.row(l) = A.row(l).array() * (d_attn.row(l).array() - inner);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(enc.queries.cols()));
  const Eigen::MatrixXd d_keys = scale * d_logits.transpose() * enc.queries;  // count x kappa

  g.encoder.queries = scale * d_logits * keys_obs;
  g.encoder.bias = d_modes;
  g.encoder.key_proj = emb_obs.transpose() * d_keys;
  g.encoder.value_proj = emb_obs.transpose() * d_values;
  return g;
}

std::optional<AmaParameters> gradients(const UserExample& ex, const AmaParameters& params,
                                       const ItemEmbeddings& emb, const AmaConfig& cfg) {
  const auto g = user_gradient(ex, params, emb, keys_values(emb, params.encoder), cfg);
  if (!g) return std::nullopt;
  return g->materialize(params, cfg.lambda);
}

// ---------------------------------------------------------------------------
// Serialization

void save_model(const std::string& path, const AmaParameters& params, const ModelMetadata& meta) {
  const auto& e = params.encoder;
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    io::put_magic(out, "AMAM");
    io::put<std::uint32_t>(out, 1);
    io::put<std::uint64_t>(out, static_cast<std::uint64_t>(params.decoder.item_weights.rows()));
    io::put<std::uint64_t>(out, static_cast<std::uint64_t>(e.value_proj.rows()));
    io::put<std::uint64_t>(out, static_cast<std::uint64_t>(e.queries.rows()));
    io::put<std::uint64_t>(out, static_cast<std::uint64_t>(e.queries.cols()));
    io::put_matrix(out, e.key_proj);
    io::put_matrix(out, e.value_proj);
    io::put_matrix(out, e.queries);
    io::put_matrix(out, e.bias);
    io::put_matrix(out, params.decoder.item_weights);
    if (!out) throw DataError("cannot write " + path);
  }
  const auto& c = meta.config;
  nlohmann::ordered_json j;
  j["config"] = {{"h", c.h},           {"d", c.d},           {"kappa", c.kappa},   {"alpha", c.alpha},
                 {"lambda", c.lambda}, {"rho", c.rho},       {"epochs", c.epochs}, {"seed", c.seed},
                 {"nce", c.nce}};
  j["item_index_hash"] = meta.item_index_hash;
  j["embeddings"] = meta.embeddings;
  j["parameters"] = params.count();
  std::ofstream side(path + ".json", std::ios::binary);
  side << j.dump(1) << '\n';
}

AmaParameters load_model(const std::string& path, ModelMetadata* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  io::expect_magic(in, "AMAM", path);
  if (io::get<std::uint32_t>(in, path) != 1) throw DataError("unsupported model version in " + path);
  const auto n = static_cast<Eigen::Index>(io::get<std::uint64_t>(in, path));
  const auto h = static_cast<Eigen::Index>(io::get<std::uint64_t>(in, path));
  const auto d = static_cast<Eigen::Index>(io::get<std::uint64_t>(in, path));
  const auto kappa = static_cast<Eigen::Index>(io::get<std::uint64_t>(in, path));
  AmaParameters p;
  p.encoder.key_proj = io::get_matrix(in, h, kappa, path);
  p.encoder.value_proj = io::get_matrix(in, h, h, path);
  p.encoder.queries = io::get_matrix(in, d, kappa, path);
  p.encoder.bias = io::get_matrix(in, d, h, path);
  p.decoder.item_weights = io::get_matrix(in, n, h, path);
  if (meta) {
    std::ifstream side(path + ".json");
    if (!side) throw DataError("missing model sidecar " + path + ".json");
    const auto j = nlohmann::json::parse(side);
    const auto& c = j.at("config");
    meta->config.h = c.at("h");
    meta->config.d = c.at("d");
    meta->config.kappa = c.at("kappa");
    meta->config.alpha = c.at("alpha");
    meta->config.lambda = c.at("lambda");
    meta->config.rho = c.at("rho");
    meta->config.epochs = c.at("epochs");
    meta->config.seed = c.at("seed");
    meta->config.nce = c.value("nce", false);
    meta->item_index_hash = j.value("item_index_hash", "");
    meta->embeddings = j.value("embeddings", "");
  }
  return p;
}

}  // namespace ama
