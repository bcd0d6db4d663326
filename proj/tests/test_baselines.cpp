#include "ama/baselines.hpp"
#include "ama/eval.hpp"
#include "oracles/dense_svd.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

using namespace ama;

namespace {

std::vector<int> top(const Scorer& s, std::span<const int> history, int k) {
  return rank_topk(s.score(history, 0), {}, k).items;
}

}  // namespace

TEST(Pop, RankingByCount) {
  // counts (5, 2, 9)
  std::vector<std::vector<int>> rows(9);
  for (int i = 0; i < 9; ++i) {
    if (i < 5) rows[i].push_back(0);
    if (i < 2) rows[i].push_back(1);
    rows[i].push_back(2);
  }
  const PopScorer pop(InteractionMatrix(9, 3, rows));
  EXPECT_EQ(pop.score({}, 0), Eigen::Vector3d(5, 2, 9));
  EXPECT_EQ(top(pop, {}, 3), (std::vector<int>{2, 0, 1}));
  const std::vector<int> other{1};
  EXPECT_EQ(top(pop, other, 3), (std::vector<int>{2, 0, 1}));
}

TEST(Pop, EqualCountsUseIndexOrder) {
  const PopScorer pop(InteractionMatrix(2, 3, {{0, 1, 2}, {0, 1, 2}}));
  EXPECT_EQ(top(pop, {}, 3), (std::vector<int>{0, 1, 2}));
}

TEST(Pop, UnseenItemRanksLast) {
  const PopScorer pop(InteractionMatrix(2, 4, {{0, 2}, {3}}));
  EXPECT_EQ(pop.score({}, 0)[1], 0.0);
  EXPECT_EQ(top(pop, {}, 4).back(), 1);
}

TEST(Pop, EmptyTrainRejected) { EXPECT_THROW(PopScorer(InteractionMatrix(2, 3)), DataError); }

TEST(PureSvd, FullRankReproducesRow) {
  const InteractionMatrix r(4, 3, {{0, 2}, {1}, {0, 1}, {2}});
  const PureSvdScorer svd(r, SvdOptions{3, 10, 10, 0});
  for (int i = 0; i < 4; ++i) {
    const auto got = svd.score(r.row(i), i);
    EXPECT_LT((got - r.dense_row(i)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(PureSvd, EmptyRowScoresZero) {
  const PureSvdScorer svd(Eigen::MatrixXd::Random(5, 2));
  EXPECT_TRUE(svd.score({}, 0).isZero(0));
}

TEST(PureSvd, MatchesDenseOracleRankTwo) {
  const InteractionMatrix r(6, 5, {{0, 1}, {1, 2, 4}, {0, 3}, {2, 3, 4}, {0, 1, 4}, {3}});
  const PureSvdScorer svd(r, SvdOptions{2, 10, 10, 3});

  const Eigen::MatrixXd dense(r.to_sparse());
  std::vector<std::vector<double>> rows(6, std::vector<double>(5));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 5; ++j) rows[i][j] = dense(i, j);
  const auto ref = oracle::dense_svd(rows);
  for (int i = 0; i < 6; ++i) {
    const auto got = svd.score(r.row(i), i);
    for (int j = 0; j < 5; ++j) {
      double expect = 0.0;
      for (int c = 0; c < 2; ++c)
        for (int t = 0; t < 5; ++t) expect += rows[i][t] * ref.v[t][c] * ref.v[j][c];
      EXPECT_NEAR(got[j], expect, 1e-8);
    }
  }
}

TEST(PureSvd, LinearInHistory) {
  const PureSvdScorer svd(Eigen::MatrixXd::Random(7, 3));
  const std::vector<int> a{1, 4}, b{2}, both{1, 2, 4};
  const Eigen::VectorXd sum = svd.score(a, 0) + svd.score(b, 0);
  EXPECT_LT((svd.score(both, 0) - sum).cwiseAbs().maxCoeff(), 1e-14);
}
