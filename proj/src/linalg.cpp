#include "ama/linalg.hpp"

#include "binary_io.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace ama {

SvdResult randomized_svd(const InteractionMatrix& r, const SvdOptions& opt) {
  const Eigen::SparseMatrix<double, Eigen::RowMajor> s = r.to_sparse();
  return randomized_svd(s, opt);
}

EmbeddingScale parse_embedding_scale(const std::string& tag) {
  if (tag == "none") return EmbeddingScale::None;
  if (tag == "sqrt-sigma") return EmbeddingScale::SqrtSigma;
  throw ConfigError("unknown embedding scale '" + tag + "' (expected none or sqrt-sigma)");
}

std::string embedding_scale_name(EmbeddingScale scale) {
  return scale == EmbeddingScale::None ? "none" : "sqrt-sigma";
}

ItemEmbeddings item_embeddings(const SvdResult& svd, EmbeddingScale scale) {
  if (scale == EmbeddingScale::None) return {svd.right};
  return {svd.right * svd.singular_values.cwiseMax(0.0).cwiseSqrt().asDiagonal()};
}

void save_embeddings(const std::string& path, const ItemEmbeddings& emb, const EmbeddingMetadata& meta) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    io::put_magic(out, "AMAE");
    io::put<std::uint32_t>(out, 1);
    io::put<std::uint64_t>(out, static_cast<std::uint64_t>(emb.items()));
    io::put<std::uint64_t>(out, static_cast<std::uint64_t>(emb.dim()));
    io::put_matrix(out, emb.values);
    if (!out) throw DataError("cannot write " + path);
  }
  nlohmann::ordered_json j;
  j["h"] = meta.h;
  j["gamma"] = meta.power_iters;
  j["oversample"] = meta.oversample;
  j["seed"] = meta.seed;
  j["scale"] = embedding_scale_name(meta.scale);
  j["source_hash"] = meta.source_hash;
  std::ofstream side(path + ".json", std::ios::binary);
  side << j.dump(1) << '\n';
}

ItemEmbeddings load_embeddings(const std::string& path, EmbeddingMetadata* meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  io::expect_magic(in, "AMAE", path);
  const auto version = io::get<std::uint32_t>(in, path);
  if (version != 1) throw DataError("unsupported embedding version in " + path);
  const auto rows = io::get<std::uint64_t>(in, path);
  const auto cols = io::get<std::uint64_t>(in, path);
  ItemEmbeddings emb{io::get_matrix(in, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols), path)};
  if (meta) {
    std::ifstream side(path + ".json");
    if (side) {
      const auto j = nlohmann::json::parse(side);
      meta->h = j.value("h", 0);
      meta->power_iters = j.value("gamma", 0);
      meta->oversample = j.value("oversample", 0);
      meta->seed = j.value("seed", std::uint64_t{0});
      meta->scale = parse_embedding_scale(j.value("scale", "none"));
      meta->source_hash = j.value("source_hash", "");
    }
  }
  return emb;
}

}  // namespace ama
