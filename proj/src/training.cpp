#include "ama/training.hpp"

#include "ama/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace ama {

OptimizerKind parse_optimizer(const std::string& tag) {
  if (tag == "adam") return OptimizerKind::Adam;
  if (tag == "sgd") return OptimizerKind::Sgd;
  throw ConfigError("unknown optimizer '" + tag + "' (expected adam or sgd)");
}

std::string optimizer_name(OptimizerKind kind) { return kind == OptimizerKind::Adam ? "adam" : "sgd"; }

void TrainConfig::validate() const {
  model.validate();
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (checkpoint_every < 0 || eval_every < 0) throw ConfigError("checkpoint_every/eval_every must be >= 0");
  if (select_best && eval_every == 0) throw ConfigError("select_best requires eval_every > 0");
}

namespace {

template <typename Fn>
void for_each_block(AmaParameters& p, const AmaParameters& g, Fn&& fn) {
  fn(p.encoder.key_proj, g.encoder.key_proj);
  fn(p.encoder.value_proj, g.encoder.value_proj);
  fn(p.encoder.queries, g.encoder.queries);
  fn(p.encoder.bias, g.encoder.bias);
  fn(p.decoder.item_weights, g.decoder.item_weights);
}

void check_shapes(const AmaParameters& p, const AmaParameters& g) {
  const auto same = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
  };
  if (!same(p.encoder.key_proj, g.encoder.key_proj) || !same(p.encoder.value_proj, g.encoder.value_proj) ||
      !same(p.encoder.queries, g.encoder.queries) || !same(p.encoder.bias, g.encoder.bias) ||
      !same(p.decoder.item_weights, g.decoder.item_weights))
    throw DimensionError("gradient shape mismatch");
}

}  // namespace

void sgd_step(AmaParameters& params, const AmaParameters& grads, double lr) {
  check_shapes(params, grads);
  params.add_scaled(grads, -lr);
}

void adam_step(AmaParameters& params, const AmaParameters& grads, AdamState& s, double lr) {
  check_shapes(params, grads);
  if (s.step == 0) {
    const auto& e = params.encoder;
    s.first = AmaParameters::zeros(params.items(), static_cast<int>(e.value_proj.rows()),
                                   static_cast<int>(e.queries.rows()), static_cast<int>(e.queries.cols()));
    s.second = s.first;
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));

  Eigen::MatrixXd* first[] = {&s.first.encoder.key_proj, &s.first.encoder.value_proj, &s.first.encoder.queries,
                              &s.first.encoder.bias, &s.first.decoder.item_weights};
  Eigen::MatrixXd* second[] = {&s.second.encoder.key_proj, &s.second.encoder.value_proj,
                               &s.second.encoder.queries, &s.second.encoder.bias, &s.second.decoder.item_weights};
  int block = 0;
  for_each_block(params, grads, [&](Eigen::MatrixXd& p, const Eigen::MatrixXd& g) {
    auto& m = *first[block];
    auto& v = *second[block];
    ++block;
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g.cwiseAbs2();
    p.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + s.epsilon);
  });
}

std::string TrainLog::csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "epoch,objective,seconds,validation\n";
  for (const auto& r : records) {
    out << r.epoch << ',' << r.objective << ',' << r.seconds << ',';
    if (r.validation) out << *r.validation;
    out << '\n';
  }
  return out.str();
}

std::string TrainLog::json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json rec{{"epoch", r.epoch}, {"objective", r.objective}, {"seconds", r.seconds}};
    if (r.validation) rec["validation"] = *r.validation;
    j.push_back(rec);
  }
  return j.dump(1);
}

TrainResult train(const InteractionMatrix& rows, const ItemEmbeddings& emb, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  cfg.validate();
  return train_from(init_parameters(rows.cols(), cfg.model), rows, emb, cfg, hooks);
}

TrainResult train_from(AmaParameters params, const InteractionMatrix& rows, const ItemEmbeddings& emb,
                       const TrainConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  const auto& mc = cfg.model;
  if (emb.items() != rows.cols()) throw DimensionError("embedding rows do not match item count");
  if (emb.dim() != mc.h) throw DimensionError("embedding size does not match h");
  if (params.items() != rows.cols()) throw DimensionError("parameter item count does not match data");

  TrainResult result;
  AdamState adam;
  std::optional<double> best_score;
  AmaParameters best;

  std::vector<int> order(rows.rows());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < mc.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::mt19937_64 shuffle_rng(mix_seed(mc.seed, 2 * static_cast<std::uint64_t>(epoch) + 1));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_objective = 0.0;
    std::size_t epoch_users = 0;
    int batch_index = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
      std::vector<int> batch(order.begin() + begin, order.begin() + end);
      std::sort(batch.begin(), batch.end());

      const ItemProjections proj = keys_values(emb, params.encoder);
      std::vector<std::optional<UserGradient>> per_user(batch.size());
      parallel_for(batch.size(), [&](std::size_t k) {
        const int user = batch[k];
        std::mt19937_64 rng(mix_seed(mix_seed(mc.seed, 2 * static_cast<std::uint64_t>(epoch) + 2), user));
        const auto target = rows.row(user);
        const auto input = corrupt(target, mc.rho, rng);
        per_user[k] = user_gradient({target, input}, params, emb, proj, mc);
      });

      AmaParameters grad = AmaParameters::zeros(params.items(), mc.h, mc.d, mc.kappa);
      double batch_objective = 0.0;
      std::size_t used = 0;
      for (const auto& g : per_user) {
        if (!g) continue;
        ++used;
        batch_objective += g->objective;
        grad.encoder.key_proj += g->encoder.key_proj;
        grad.encoder.value_proj += g->encoder.value_proj;
        grad.encoder.queries += g->encoder.queries;
        grad.encoder.bias += g->encoder.bias;
        g->accumulate_decoder(grad.decoder.item_weights);
      }
      if (used == 0) continue;
      if (!std::isfinite(batch_objective)) throw TrainingError(epoch, batch_index, "non-finite objective");

      const double inv = 1.0 / static_cast<double>(used);
      grad.encoder.key_proj *= inv;
      grad.encoder.value_proj *= inv;
      grad.encoder.queries *= inv;
      grad.encoder.bias *= inv;
      grad.decoder.item_weights *= inv;
      grad.decoder.item_weights += 2.0 * mc.lambda * params.decoder.item_weights;

      if (cfg.optimizer == OptimizerKind::Adam)
        adam_step(params, grad, adam, cfg.learning_rate);
      else
        sgd_step(params, grad, cfg.learning_rate);
      if (!params.all_finite()) throw TrainingError(epoch, batch_index, "non-finite parameters after update");

      epoch_objective += batch_objective;
      epoch_users += used;
    }

    TrainLog::Record rec;
    rec.epoch = epoch;
    rec.objective = epoch_users ? epoch_objective / static_cast<double>(epoch_users) : 0.0;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    const int done = epoch + 1;
    if (cfg.eval_every > 0 && hooks.validate && done % cfg.eval_every == 0) {
      rec.validation = hooks.validate(params, epoch);
      if (cfg.select_best && (!best_score || *rec.validation > *best_score)) {
        best_score = rec.validation;
        best = params;
      }
    }
    if (cfg.checkpoint_every > 0 && hooks.checkpoint && done % cfg.checkpoint_every == 0)
      hooks.checkpoint(params, epoch);
    if (hooks.progress) hooks.progress(rec);
    result.log.records.push_back(rec);
  }

  result.params = cfg.select_best && best_score ? std::move(best) : std::move(params);
  return result;
}

}  // namespace ama
