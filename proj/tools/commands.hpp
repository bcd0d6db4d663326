#pragma once

#include "ama/config.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ama::cli {

/// Settings shared by every subcommand. Later sources win:
/// preset, then config file, then `--set key=value` overrides.
struct ConfigSources {
  std::string preset;
  std::string config_file;
  std::vector<std::string> overrides;
  unsigned threads = 0;  // 0 keeps the configured value
};

RunConfig resolve_config(const ConfigSources& src);

struct PrepOptions {
  std::string input;
  std::optional<std::string> format;
  std::optional<double> threshold;
  std::optional<std::string> column_order;
  std::string out_dir;
};

struct EmbedOptions {
  std::string data_dir;
  std::string out;
};

struct TrainOptions {
  std::string data_dir;
  std::string out_model;
  std::string embeddings;      // optional precomputed embedding file
  std::string checkpoint_dir;  // defaults to the model's directory
  bool quiet = false;
};

struct EvaluateOptions {
  std::string model;
  std::string baseline;
  std::string data_dir;
  std::string split = "test";
  std::optional<std::string> ks;
  std::string out = "-";
  std::string table;
};

struct ExplainOptions {
  std::string model;
  std::string data_dir;
  std::optional<std::string> user;
  bool modes = false;
  bool histogram = false;
  int k = 10;
  int n = 10;
  std::string out = "-";
  std::string dot;
};

int cmd_prep(const PrepOptions& opt, const ConfigSources& src);
int cmd_embed(const EmbedOptions& opt, const ConfigSources& src);
int cmd_train(const TrainOptions& opt, const ConfigSources& src);
int cmd_evaluate(const EvaluateOptions& opt, const ConfigSources& src);
int cmd_explain(const ExplainOptions& opt, const ConfigSources& src);

/// Reads `$AMA_DATA_DIR` when `dir` is empty.
std::string data_dir_or_default(const std::string& dir);

std::string config_help();

}  // namespace ama::cli
