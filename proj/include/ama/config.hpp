#pragma once

#include "ama/dataset.hpp"
#include "ama/eval.hpp"
#include "ama/linalg.hpp"
#include "ama/training.hpp"

#include <string>
#include <vector>

namespace ama {

enum class Algorithm { Ama, Pop, PureSvd };

Algorithm parse_algorithm(const std::string& tag);
std::string algorithm_name(Algorithm a);

/// Every tunable of the pipeline. Loaded from flat `key = value` files and
/// overridden from the command line.
struct RunConfig {
  Algorithm algorithm = Algorithm::Ama;

  RatingFormat format = RatingFormat::MovielensDat;
  std::string column_order = "item,user,rating,timestamp";
  double threshold = 3.0;
  SplitFractions fractions;

  int svd_iters = 10;
  int oversample = 10;
  EmbeddingScale embed_scale = EmbeddingScale::None;

  TrainConfig train;

  EvalOptions eval;
  unsigned threads = 1;

  void set(const std::string& key, const std::string& value);
  void load_file(const std::string& path);
  void load_text(const std::string& text, const std::string& origin = "<text>");
  void validate() const;

  std::string dump() const;
};

struct ConfigKey {
  const char* key;
  const char* symbol;  // empty when the key has no model symbol
  const char* help;
};

const std::vector<ConfigKey>& config_keys();

std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);

std::vector<int> parse_int_list(const std::string& text);

}  // namespace ama
