#pragma once

#include "ama/dataset.hpp"
#include "ama/linalg.hpp"
#include "ama/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

struct Instance {
  ama::AmaConfig cfg;
  ama::AmaParameters params;
  ama::ItemEmbeddings emb;
  std::vector<int> target;
  std::vector<int> input;
};

inline Eigen::MatrixXd gaussian(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

/// Random parameters and histories with every block nonzero. `input` is a
/// nonempty subset of `target`.
inline Instance random_instance(std::uint64_t seed, int n, int h, int d, int kappa) {
  std::mt19937_64 rng(seed);
  Instance inst;
  inst.cfg.h = h;
  inst.cfg.d = d;
  inst.cfg.kappa = kappa;
  inst.cfg.alpha = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
  inst.cfg.lambda = std::uniform_real_distribution<double>(0.0, 0.1)(rng);
  inst.emb.values = gaussian(n, h, rng);
  auto& p = inst.params;
  p.encoder.key_proj = gaussian(h, kappa, rng, 0.7);
  p.encoder.value_proj = gaussian(h, h, rng, 0.7);
  p.encoder.queries = gaussian(d, kappa, rng, 0.7);
  p.encoder.bias = gaussian(d, h, rng, 0.3);
  p.decoder.item_weights = gaussian(n, h, rng, 0.5);

  std::bernoulli_distribution coin(0.5);
  for (int j = 0; j < n; ++j)
    if (coin(rng)) inst.target.push_back(j);
  if (inst.target.empty()) inst.target.push_back(static_cast<int>(rng() % n));
  for (int j : inst.target)
    if (coin(rng)) inst.input.push_back(j);
  if (inst.input.empty()) inst.input.push_back(inst.target.front());
  return inst;
}

inline ama::InteractionMatrix random_binary(int rows, int cols, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(density);
  std::vector<std::vector<int>> lists(rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (coin(rng)) lists[i].push_back(j);
  return ama::InteractionMatrix(rows, cols, std::move(lists));
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("ama_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Synthetic movielens-dat ratings with a few taste clusters. Timestamps
/// increase per user so the chronological split is well defined.
inline std::string synthetic_movielens(int users, int items, int per_user, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::string out;
  const int clusters = 3;
  for (int u = 1; u <= users; ++u) {
    const int taste = static_cast<int>(rng() % clusters);
    std::vector<char> seen(items + 1, 0);
    for (int e = 0; e < per_user; ++e) {
      int item = 0;
      for (int tries = 0; tries < 50; ++tries) {
        const bool on_taste = std::bernoulli_distribution(0.8)(rng);
        const int base = on_taste ? taste * (items / clusters) : 0;
        const int span = on_taste ? items / clusters : items;
        item = 1 + base + static_cast<int>(rng() % span);
        if (!seen[item]) break;
      }
      seen[item] = 1;
      const int rating = rng() % 10 < 8 ? 5 : 2;
      out += std::to_string(u) + "::" + std::to_string(item) + "::" + std::to_string(rating) +
             "::" + std::to_string(1000000 + 100 * u + e) + "\n";
    }
  }
  return out;
}

}  // namespace fixtures
