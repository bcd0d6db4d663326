#pragma once

#include "ama/dataset.hpp"
#include "ama/linalg.hpp"
#include "ama/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ama {

enum class OptimizerKind { Adam, Sgd };

OptimizerKind parse_optimizer(const std::string& tag);
std::string optimizer_name(OptimizerKind kind);

struct TrainConfig {
  AmaConfig model;
  double learning_rate = 1e-3;
  int batch_size = 512;  // users per optimizer step
  OptimizerKind optimizer = OptimizerKind::Adam;
  int checkpoint_every = 0;  // epochs; 0 disables
  int eval_every = 0;        // epochs; 0 disables
  bool select_best = false;  // keep the parameters with the best validation score

  void validate() const;
};

void sgd_step(AmaParameters& params, const AmaParameters& grads, double lr);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  AmaParameters first;
  AmaParameters second;
};

void adam_step(AmaParameters& params, const AmaParameters& grads, AdamState& state, double lr);

struct TrainLog {
  struct Record {
    int epoch = 0;
    double objective = 0.0;  // mean per-user objective over the epoch
    double seconds = 0.0;
    std::optional<double> validation;
  };
  std::vector<Record> records;

  std::string csv() const;
  std::string json() const;
};

struct TrainHooks {
  /// Higher is better. Called after every `eval_every`-th epoch.
  std::function<double(const AmaParameters&, int epoch)> validate;
  /// Called after every `checkpoint_every`-th epoch.
  std::function<void(const AmaParameters&, int epoch)> checkpoint;
  /// Called after every epoch with its log record.
  std::function<void(const TrainLog::Record&)> progress;
};

struct TrainResult {
  AmaParameters params;
  TrainLog log;
};

/// Mini-batch training. Each epoch shuffles users, redraws the corruption of
/// every user, and applies one optimizer step per batch of users. Within a
/// batch, per-user gradients are summed in ascending user index.
TrainResult train(const InteractionMatrix& train_rows, const ItemEmbeddings& emb, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

/// Same as above, starting from the given parameters.
TrainResult train_from(AmaParameters params, const InteractionMatrix& train_rows, const ItemEmbeddings& emb,
                       const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace ama
