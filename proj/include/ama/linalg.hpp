#pragma once

#include "ama/dataset.hpp"
#include "ama/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>

namespace ama {

template <typename Scalar>
struct BasicSvd {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix left;             // m x h
  Vector singular_values;  // h, nonincreasing
  Matrix right;            // n x h
};

using SvdResult = BasicSvd<double>;

struct SvdOptions {
  int rank = 1;
  int power_iters = 10;
  int oversample = 10;
  std::uint64_t seed = 0;
};

/// Orthonormal basis for the column space of a tall matrix (thin Householder QR).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> orthonormal_basis(
    const Eigen::MatrixBase<Derived>& a) {
  using Matrix = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
}

/// Flips singular vector pairs so each right column's largest-magnitude entry is positive.
template <typename Scalar>
void canonicalize_signs(BasicSvd<Scalar>& svd) {
  for (Eigen::Index c = 0; c < svd.right.cols(); ++c) {
    Eigen::Index arg = 0;
    svd.right.col(c).cwiseAbs().maxCoeff(&arg);
    if (svd.right(arg, c) < Scalar(0)) {
      svd.right.col(c) *= Scalar(-1);
      svd.left.col(c) *= Scalar(-1);
    }
  }
}

/// Truncated SVD by Gaussian range finding with power iterations. The basis
/// is re-orthonormalized by QR after every multiplication. Works on any
/// Eigen expression supporting products with dense matrices (dense or sparse).
template <typename MatrixType>
auto randomized_svd(const MatrixType& a, const SvdOptions& opt) {
  using Scalar = typename MatrixType::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const Eigen::Index full = std::min(m, n);
  if (opt.rank < 1 || opt.rank > full)
    throw DimensionError("svd rank " + std::to_string(opt.rank) + " outside [1, " + std::to_string(full) + "]");
  if (opt.power_iters < 0) throw ConfigError("power iterations must be >= 0");
  if (opt.oversample < 0) throw ConfigError("oversampling must be >= 0");

  const Eigen::Index width = std::min<Eigen::Index>(opt.rank + opt.oversample, full);

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix omega(n, width);
  for (Eigen::Index j = 0; j < width; ++j)
    for (Eigen::Index i = 0; i < n; ++i) omega(i, j) = static_cast<Scalar>(normal(rng));

  Matrix basis = orthonormal_basis(Matrix(a * omega));
  for (int it = 0; it < opt.power_iters; ++it) {
    const Matrix co = orthonormal_basis(Matrix(a.transpose() * basis));
    basis = orthonormal_basis(Matrix(a * co));
  }

  const Matrix small = (a.transpose() * basis).transpose();  // width x n
  Eigen::JacobiSVD<Matrix> svd(small, Eigen::ComputeThinU | Eigen::ComputeThinV);

  BasicSvd<Scalar> out;
  out.singular_values = svd.singularValues().head(opt.rank);
  out.left = basis * svd.matrixU().leftCols(opt.rank);
  out.right = svd.matrixV().leftCols(opt.rank);
  canonicalize_signs(out);
  return out;
}

SvdResult randomized_svd(const InteractionMatrix& r, const SvdOptions& opt);

enum class EmbeddingScale { None, SqrtSigma };

EmbeddingScale parse_embedding_scale(const std::string& tag);
std::string embedding_scale_name(EmbeddingScale scale);

/// Fixed n x h item embedding matrix; row j embeds item j.
struct ItemEmbeddings {
  Eigen::MatrixXd values;

  Eigen::Index items() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

ItemEmbeddings item_embeddings(const SvdResult& svd, EmbeddingScale scale = EmbeddingScale::None);

struct EmbeddingMetadata {
  int h = 0;
  int power_iters = 0;
  int oversample = 0;
  std::uint64_t seed = 0;
  EmbeddingScale scale = EmbeddingScale::None;
  std::string source_hash;
};

/// Binary layout: "AMAE", u32 version, u64 rows, u64 cols, row-major f64
/// (little endian). Metadata goes to `path + ".json"`.
void save_embeddings(const std::string& path, const ItemEmbeddings& emb, const EmbeddingMetadata& meta);
ItemEmbeddings load_embeddings(const std::string& path, EmbeddingMetadata* meta = nullptr);

}  // namespace ama
