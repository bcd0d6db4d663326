#include "ama/linalg.hpp"
#include "oracles/dense_svd.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace ama;

namespace {

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

double orthonormality_error(const Eigen::MatrixXd& q) {
  return (q.transpose() * q - Eigen::MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(GolubKahanOracle, ReconstructsInput) {
  std::mt19937_64 rng(3);
  for (auto [m, n] : {std::pair{5, 3}, std::pair{3, 5}, std::pair{6, 6}}) {
    const Eigen::MatrixXd a = fixtures::gaussian(m, n, rng);
    const auto svd = oracle::dense_svd(to_rows(a));
    Eigen::MatrixXd back = Eigen::MatrixXd::Zero(m, n);
    for (std::size_t c = 0; c < svd.w.size(); ++c)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) back(i, j) += svd.u[i][c] * svd.w[c] * svd.v[j][c];
    EXPECT_LT((back - a).cwiseAbs().maxCoeff(), 1e-12);
    for (std::size_t c = 1; c < svd.w.size(); ++c) EXPECT_GE(svd.w[c - 1], svd.w[c]);
  }
}

TEST(RandomizedSvd, IdentitySpectrum) {
  const auto svd = randomized_svd(Eigen::MatrixXd(Eigen::MatrixXd::Identity(3, 3)), SvdOptions{3, 10, 10, 0});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(svd.singular_values[i], 1.0, 1e-12);
}

TEST(RandomizedSvd, RankOneSpectrum) {
  Eigen::VectorXd a(4), b(3);
  a << 1, 2, 2, 4;
  b << 2, -1, 2;
  a.normalize();
  b.normalize();
  const Eigen::MatrixXd r = a * b.transpose();
  const auto svd = randomized_svd(r, SvdOptions{1, 4, 2, 5});
  EXPECT_NEAR(svd.singular_values[0], 1.0, 1e-12);
  const Eigen::MatrixXd approx = svd.left * svd.singular_values.asDiagonal() * svd.right.transpose();
  EXPECT_LT((r - approx).norm(), 1e-12);
}

TEST(RandomizedSvd, RankOutOfRange) {
  const Eigen::MatrixXd r = Eigen::MatrixXd::Ones(3, 2);
  EXPECT_THROW(randomized_svd(r, SvdOptions{0, 1, 1, 0}), DimensionError);
  EXPECT_THROW(randomized_svd(r, SvdOptions{3, 1, 1, 0}), DimensionError);
}

TEST(RandomizedSvd, BinaryEightBySixMatchesOracle) {
  const auto r = fixtures::random_binary(8, 6, 0.5, 21);
  const auto svd = randomized_svd(r, SvdOptions{4, 10, 10, 1});
  const auto ref = oracle::dense_svd(to_rows(Eigen::MatrixXd(r.to_sparse())));
  for (int c = 0; c < 4; ++c) EXPECT_NEAR(svd.singular_values[c], ref.w[c], 1e-6);
}

TEST(RandomizedSvd, MatchesDenseOracleUpTo32) {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    std::mt19937_64 rng(seed);
    const int m = 2 + static_cast<int>(rng() % 31);
    const int n = 2 + static_cast<int>(rng() % 31);
    const int rank = 1 + static_cast<int>(rng() % std::min(m, n));
    const auto r = fixtures::random_binary(m, n, 0.3, seed + 100);
    const Eigen::MatrixXd dense(r.to_sparse());
    const auto svd = randomized_svd(r, SvdOptions{rank, 10, 10, seed});
    const auto ref = oracle::dense_svd(to_rows(dense));
    for (int c = 0; c < rank; ++c) EXPECT_NEAR(svd.singular_values[c], ref.w[c], 1e-6) << m << "x" << n;
    EXPECT_LT(orthonormality_error(svd.left), 1e-8);
    EXPECT_LT(orthonormality_error(svd.right), 1e-8);
  }
}

TEST(RandomizedSvd, SparseAndDenseAgree) {
  const auto r = fixtures::random_binary(20, 15, 0.3, 4);
  const auto a = randomized_svd(r, SvdOptions{5, 3, 4, 9});
  const auto b = randomized_svd(Eigen::MatrixXd(r.to_sparse()), SvdOptions{5, 3, 4, 9});
  EXPECT_LT((a.singular_values - b.singular_values).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((a.right - b.right).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(RandomizedSvd, ReconstructionErrorNonincreasingInRank) {
  const auto r = fixtures::random_binary(30, 25, 0.25, 8);
  const Eigen::MatrixXd dense(r.to_sparse());
  double previous = dense.norm();
  for (int h = 1; h <= 25; ++h) {
    const auto svd = randomized_svd(r, SvdOptions{h, 10, 10, 2});
    const double err = (dense - svd.left * svd.singular_values.asDiagonal() * svd.right.transpose()).norm();
    EXPECT_LE(err, previous + 1e-9);
    previous = err;
  }
  EXPECT_LT(previous, 1e-8);
}

TEST(RandomizedSvd, SameSeedSameResult) {
  const auto r = fixtures::random_binary(25, 18, 0.3, 5);
  const auto a = randomized_svd(r, SvdOptions{6, 2, 3, 42});
  const auto b = randomized_svd(r, SvdOptions{6, 2, 3, 42});
  EXPECT_EQ(a.right, b.right);
  EXPECT_EQ(a.singular_values, b.singular_values);
}

TEST(Embeddings, NoneIsRightFactor) {
  SvdResult svd;
  svd.right = Eigen::MatrixXd::Random(5, 2);
  svd.singular_values = Eigen::Vector2d(4, 1);
  EXPECT_EQ(item_embeddings(svd, EmbeddingScale::None).values, svd.right);
}

TEST(Embeddings, SqrtSigmaScalesColumns) {
  SvdResult svd;
  svd.right = Eigen::MatrixXd::Random(5, 2);
  svd.singular_values = Eigen::Vector2d(4, 1);
  const auto e = item_embeddings(svd, EmbeddingScale::SqrtSigma).values;
  EXPECT_EQ(e.col(0), 2.0 * svd.right.col(0));
  EXPECT_EQ(e.col(1), svd.right.col(1));
}

TEST(Embeddings, ZeroSingularValueZeroesColumn) {
  SvdResult svd;
  svd.right = Eigen::MatrixXd::Random(4, 2);
  svd.singular_values = Eigen::Vector2d(9, 0);
  const auto e = item_embeddings(svd, EmbeddingScale::SqrtSigma).values;
  EXPECT_TRUE(e.col(1).isZero(0));
}

TEST(Embeddings, FileRoundTrip) {
  ItemEmbeddings emb{Eigen::MatrixXd::Random(7, 3)};
  const auto dir = fixtures::temp_dir("emb");
  const auto path = (dir / "items.emb").string();
  save_embeddings(path, emb, {3, 10, 10, 5, EmbeddingScale::SqrtSigma, "abc"});
  EmbeddingMetadata meta;
  const auto back = load_embeddings(path, &meta);
  EXPECT_EQ(back.values, emb.values);
  EXPECT_EQ(meta.h, 3);
  EXPECT_EQ(meta.seed, 5u);
  EXPECT_EQ(meta.scale, EmbeddingScale::SqrtSigma);
  EXPECT_EQ(meta.source_hash, "abc");
}
