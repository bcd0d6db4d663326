#include "ama/training.hpp"
#include "ama/util.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace ama;

namespace {

struct Problem {
  InteractionMatrix rows;
  ItemEmbeddings emb;
  TrainConfig cfg;
};

Problem small_problem(int m, int n, int h, int d) {
  Problem p;
  p.rows = fixtures::random_binary(m, n, 0.3, 17);
  p.emb = item_embeddings(randomized_svd(p.rows, SvdOptions{h, 5, 5, 1}));
  p.cfg.model.h = h;
  p.cfg.model.d = d;
  p.cfg.model.kappa = 2;
  p.cfg.model.seed = 4;
  p.cfg.batch_size = 8;
  p.cfg.learning_rate = 0.01;
  return p;
}

AmaParameters filled(int n, int h, int d, int kappa, double value) {
  auto p = AmaParameters::zeros(n, h, d, kappa);
  p.encoder.key_proj.setConstant(value);
  p.encoder.value_proj.setConstant(value);
  p.encoder.queries.setConstant(value);
  p.encoder.bias.setConstant(value);
  p.decoder.item_weights.setConstant(value);
  return p;
}

}  // namespace

TEST(Optimizer, SgdZeroGradientLeavesParams) {
  auto p = filled(3, 2, 1, 1, 0.7);
  const auto before = p;
  sgd_step(p, AmaParameters::zeros(3, 2, 1, 1), 0.1);
  EXPECT_TRUE(p == before);
}

TEST(Optimizer, SgdStep) {
  auto p = filled(3, 2, 1, 1, 1.0);
  sgd_step(p, filled(3, 2, 1, 1, 0.5), 0.1);
  EXPECT_NEAR(p.decoder.item_weights(0, 0), 0.95, 1e-15);
  EXPECT_NEAR(p.encoder.key_proj(1, 0), 0.95, 1e-15);
}

TEST(Optimizer, AdamConstantGradientStepApproachesLearningRate) {
  auto p = filled(2, 2, 1, 1, 0.0);
  const auto g = filled(2, 2, 1, 1, 0.3);
  AdamState state;
  double last = 0.0;
  for (int step = 0; step < 200; ++step) {
    const double before = p.encoder.bias(0, 0);
    adam_step(p, g, state, 1e-3);
    last = before - p.encoder.bias(0, 0);
  }
  EXPECT_NEAR(last, 1e-3, 1e-9);
}

TEST(Optimizer, ShapeMismatchRejected) {
  auto p = filled(3, 2, 1, 1, 0.0);
  EXPECT_THROW(sgd_step(p, AmaParameters::zeros(4, 2, 1, 1), 0.1), DimensionError);
}

TEST(Train, ZeroEpochsReturnsInitialParameters) {
  auto pr = small_problem(12, 10, 3, 2);
  pr.cfg.model.epochs = 0;
  const auto result = train(pr.rows, pr.emb, pr.cfg);
  EXPECT_TRUE(result.params == init_parameters(10, pr.cfg.model));
  EXPECT_TRUE(result.log.records.empty());
}

TEST(Train, HugeRegularizerShrinksDecoder) {
  auto pr = small_problem(20, 12, 3, 2);
  pr.cfg.model.lambda = 1e6;
  pr.cfg.model.epochs = 60;
  pr.cfg.optimizer = OptimizerKind::Sgd;
  pr.cfg.learning_rate = 1e-7;
  auto start = init_parameters(12, pr.cfg.model);
  start.decoder.item_weights.setConstant(1.0);
  const double before = start.decoder.item_weights.norm();
  const auto result = train_from(start, pr.rows, pr.emb, pr.cfg);
  EXPECT_LT(result.params.decoder.item_weights.norm(), 1e-2 * before);
}

TEST(Train, ObjectiveDecreases) {
  auto pr = small_problem(30, 20, 4, 2);
  pr.cfg.model.epochs = 51;
  const auto result = train(pr.rows, pr.emb, pr.cfg);
  ASSERT_EQ(result.log.records.size(), 51u);
  EXPECT_LT(result.log.records[50].objective, result.log.records[0].objective);
  EXPECT_EQ(result.log.records[0].epoch, 0);
}

TEST(Train, SameSeedBitIdenticalAcrossThreadCounts) {
  auto pr = small_problem(40, 25, 4, 3);
  pr.cfg.model.epochs = 8;
  set_threads(1);
  const auto one = train(pr.rows, pr.emb, pr.cfg);
  set_threads(4);
  const auto four = train(pr.rows, pr.emb, pr.cfg);
  set_threads(1);
  EXPECT_TRUE(one.params == four.params);
  for (std::size_t e = 0; e < one.log.records.size(); ++e)
    EXPECT_EQ(one.log.records[e].objective, four.log.records[e].objective);
}

TEST(Train, DifferentSeedsDiffer) {
  auto pr = small_problem(20, 15, 3, 2);
  pr.cfg.model.epochs = 2;
  const auto a = train(pr.rows, pr.emb, pr.cfg);
  pr.cfg.model.seed = 5;
  const auto b = train(pr.rows, pr.emb, pr.cfg);
  EXPECT_FALSE(a.params == b.params);
}

TEST(Train, UsersWithEmptyHistoryAreSkipped) {
  auto pr = small_problem(10, 8, 3, 1);
  std::vector<std::vector<int>> lists(10);
  lists[3] = {1, 2, 5};
  pr.rows = InteractionMatrix(10, 8, lists);
  pr.cfg.model.epochs = 3;
  pr.cfg.model.rho = 0.0;
  EXPECT_NO_THROW(train(pr.rows, pr.emb, pr.cfg));
}

TEST(Train, NonFiniteObjectiveAborts) {
  auto pr = small_problem(10, 8, 3, 1);
  pr.cfg.model.epochs = 1;
  auto start = init_parameters(8, pr.cfg.model);
  start.decoder.item_weights(0, 0) = std::numeric_limits<double>::infinity();
  try {
    train_from(start, pr.rows, pr.emb, pr.cfg);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_EQ(e.epoch(), 0);
    EXPECT_EQ(e.batch(), 0);
  }
}

TEST(Train, HooksAndBestSelection) {
  auto pr = small_problem(20, 15, 3, 2);
  pr.cfg.model.epochs = 6;
  pr.cfg.eval_every = 2;
  pr.cfg.checkpoint_every = 3;
  pr.cfg.select_best = true;
  std::vector<int> validated, checkpoints;
  std::vector<AmaParameters> seen;
  TrainHooks hooks;
  hooks.validate = [&](const AmaParameters& p, int epoch) {
    validated.push_back(epoch);
    seen.push_back(p);
    return epoch == 3 ? 1.0 : 0.0;
  };
  hooks.checkpoint = [&](const AmaParameters&, int epoch) { checkpoints.push_back(epoch); };
  const auto result = train(pr.rows, pr.emb, pr.cfg, hooks);
  EXPECT_EQ(validated, (std::vector<int>{1, 3, 5}));
  EXPECT_EQ(checkpoints, (std::vector<int>{2, 5}));
  EXPECT_TRUE(result.params == seen[1]);
  EXPECT_TRUE(result.log.records[3].validation.has_value());
  EXPECT_FALSE(result.log.records[2].validation.has_value());
}

TEST(Train, LogFormats) {
  TrainLog log;
  log.records.push_back({0, 1.5, 0.25, std::nullopt});
  log.records.push_back({1, 1.25, 0.5, 0.125});
  EXPECT_EQ(log.csv(), "epoch,objective,seconds,validation\n0,1.5,0.25,\n1,1.25,0.5,0.125\n");
  EXPECT_NE(log.json().find("\"validation\": 0.125"), std::string::npos);
}
