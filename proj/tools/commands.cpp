#include "commands.hpp"

#include "ama/baselines.hpp"
#include "ama/errors.hpp"
#include "ama/explain.hpp"
#include "ama/model.hpp"
#include "ama/util.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

namespace ama::cli {

namespace fs = std::filesystem;

namespace {

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw DataError("cannot write " + path);
}

SplitDataset load_data(const std::string& dir) {
  if (!fs::exists(fs::path(dir) / "dataset.json")) throw DataError("no split files in '" + dir + "' (run prep first)");
  return read_split(dir);
}

struct LoadedModel {
  AmaParameters params;
  ModelMetadata meta;
  ItemEmbeddings emb;
};

LoadedModel load_trained(const std::string& path, const SplitDataset& data) {
  if (!fs::exists(path)) throw DataError("model file not found: " + path);
  LoadedModel m;
  m.params = load_model(path, &m.meta);
  if (m.meta.embeddings.empty()) throw DataError("model sidecar does not name an embedding file");
  const auto emb_path = fs::path(path).parent_path() / m.meta.embeddings;
  m.emb = load_embeddings(emb_path.string());
  if (!m.meta.item_index_hash.empty() && m.meta.item_index_hash != data.items.hash())
    throw DataError("model was trained on a different item index than '" + path + "' expects");
  if (m.params.items() != data.train.cols()) throw DimensionError("model item count does not match the dataset");
  return m;
}

SvdOptions svd_options(const RunConfig& cfg, int rank) {
  return {rank, cfg.svd_iters, cfg.oversample, cfg.train.model.seed};
}

}  // namespace

std::string data_dir_or_default(const std::string& dir) {
  if (!dir.empty()) return dir;
  if (const char* env = std::getenv("AMA_DATA_DIR"); env && *env) return env;
  throw ConfigError("no data directory given (use --data or set AMA_DATA_DIR)");
}

RunConfig resolve_config(const ConfigSources& src) {
  RunConfig cfg = src.preset.empty() ? RunConfig{} : preset(src.preset);
  if (!src.config_file.empty()) cfg.load_file(src.config_file);
  for (const auto& kv : src.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (src.threads > 0) cfg.threads = src.threads;
  cfg.validate();
  set_threads(cfg.threads);
  return cfg;
}

std::string config_help() {
  std::string out = "Config keys (key = value; model symbol in brackets):\n";
  for (const auto& k : config_keys()) {
    out += "  ";
    out += k.key;
    if (*k.symbol) {
      out += " [";
      out += k.symbol;
      out += "]";
    }
    out += ": ";
    out += k.help;
    out += '\n';
  }
  out += "Presets:";
  for (const auto& p : preset_names()) out += " " + p;
  out += "\nEnvironment: AMA_DATA_DIR is the default --data directory.\n";
  return out;
}

int cmd_prep(const PrepOptions& opt, const ConfigSources& src) {
  ConfigSources s = src;
  if (opt.format) s.overrides.push_back("format=" + *opt.format);
  if (opt.threshold) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "threshold=%.17g", *opt.threshold);
    s.overrides.emplace_back(buf);
  }
  if (opt.column_order) s.overrides.push_back("column_order=" + *opt.column_order);
  const auto cfg = resolve_config(s);

  if (!fs::exists(opt.input)) throw DataError("input file not found: " + opt.input);
  const auto events = parse_ratings(opt.input, cfg.format, CsvLayout::parse(cfg.column_order));
  const auto positive = binarize(events, cfg.threshold);
  if (positive.empty()) throw DataError("empty dataset: no rating above threshold " + std::to_string(cfg.threshold));
  const auto data = temporal_split(positive, cfg.fractions);

  SplitMetadata meta;
  meta.threshold = cfg.threshold;
  meta.fractions = cfg.fractions;
  meta.source = fs::path(opt.input).filename().string();
  write_split(opt.out_dir, data, meta);
  std::fprintf(stderr, "prep: %d users, %d items, %zu/%zu/%zu train/validation/test interactions\n",
               data.users.size(), data.items.size(), data.train.nnz(), data.validation.nnz(), data.test.nnz());
  return 0;
}

int cmd_embed(const EmbedOptions& opt, const ConfigSources& src) {
  const auto cfg = resolve_config(src);
  const auto data = load_data(data_dir_or_default(opt.data_dir));
  const auto svd = randomized_svd(data.train, svd_options(cfg, cfg.train.model.h));
  EmbeddingMetadata meta{cfg.train.model.h, cfg.svd_iters, cfg.oversample, cfg.train.model.seed, cfg.embed_scale,
                         data.items.hash()};
  save_embeddings(opt.out, item_embeddings(svd, cfg.embed_scale), meta);
  return 0;
}

int cmd_train(const TrainOptions& opt, const ConfigSources& src) {
  const auto cfg = resolve_config(src);
  if (cfg.algorithm != Algorithm::Ama)
    throw ConfigError("train fits AMA models only; evaluate baselines with `evaluate --baseline`");
  const auto data = load_data(data_dir_or_default(opt.data_dir));
  const auto& mc = cfg.train.model;

  const fs::path model_path(opt.out_model);
  if (model_path.has_parent_path()) fs::create_directories(model_path.parent_path());

  ItemEmbeddings emb;
  std::string emb_name;
  if (!opt.embeddings.empty()) {
    emb = load_embeddings(opt.embeddings);
    emb_name = fs::relative(fs::absolute(opt.embeddings), fs::absolute(model_path).parent_path()).string();
  } else {
    const auto svd = randomized_svd(data.train, svd_options(cfg, mc.h));
    emb = item_embeddings(svd, cfg.embed_scale);
    emb_name = model_path.filename().string() + ".emb";
    save_embeddings((model_path.parent_path() / emb_name).string(), emb,
                    {mc.h, cfg.svd_iters, cfg.oversample, mc.seed, cfg.embed_scale, data.items.hash()});
  }
  if (emb.items() != data.train.cols() || emb.dim() != mc.h)
    throw DimensionError("embedding shape does not match the dataset and h");

  ModelMetadata meta{mc, data.items.hash(), emb_name};
  const fs::path ckpt_dir = opt.checkpoint_dir.empty() ? model_path.parent_path() : fs::path(opt.checkpoint_dir);

  TrainHooks hooks;
  hooks.validate = [&](const AmaParameters& p, int) {
    const AmaScorer scorer(p, emb);
    EvalOptions eo = cfg.eval;
    return evaluate(scorer, data, SplitName::Validation, eo).at("R-Precision").mean;
  };
  hooks.checkpoint = [&](const AmaParameters& p, int epoch) {
    if (!ckpt_dir.empty()) fs::create_directories(ckpt_dir);
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, ".epoch%04d", epoch + 1);
    const auto path = ckpt_dir / (model_path.filename().string() + suffix);
    ModelMetadata m = meta;
    m.embeddings = fs::relative(fs::absolute(model_path).parent_path() / emb_name, fs::absolute(path).parent_path()).string();
    save_model(path.string(), p, m);
  };
  if (!opt.quiet) {
    hooks.progress = [](const TrainLog::Record& r) {
      std::fprintf(stderr, "epoch %4d  objective %.6f  %.2fs", r.epoch + 1, r.objective, r.seconds);
      if (r.validation) std::fprintf(stderr, "  validation R-Precision %.4f", *r.validation);
      std::fprintf(stderr, "\n");
    };
  }

  const auto result = train(data.train, emb, cfg.train, hooks);
  save_model(opt.out_model, result.params, meta);
  write_output(opt.out_model + ".log.csv", result.log.csv());
  write_output(opt.out_model + ".log.json", result.log.json());
  return 0;
}

int cmd_evaluate(const EvaluateOptions& opt, const ConfigSources& src) {
  ConfigSources s = src;
  if (opt.ks) s.overrides.push_back("ks=" + *opt.ks);
  const auto cfg = resolve_config(s);
  const auto split = parse_split(opt.split);
  if (opt.model.empty() == opt.baseline.empty()) throw ConfigError("give exactly one of --model or --baseline");
  const auto data = load_data(data_dir_or_default(opt.data_dir));

  std::unique_ptr<Scorer> scorer;
  std::string label;
  std::string hash;
  if (!opt.model.empty()) {
    auto m = load_trained(opt.model, data);
    scorer = std::make_unique<AmaScorer>(std::move(m.params), std::move(m.emb));
    label = "AMA";
    hash = hash_file(opt.model);
  } else {
    const auto algo = parse_algorithm(opt.baseline);
    if (algo == Algorithm::Pop) {
      scorer = std::make_unique<PopScorer>(data.train);
      label = "POP";
      hash = "pop";
    } else if (algo == Algorithm::PureSvd) {
      scorer = std::make_unique<PureSvdScorer>(data.train, svd_options(cfg, cfg.train.model.h));
      label = "PureSVD";
      hash = "puresvd:h=" + std::to_string(cfg.train.model.h) + ",gamma=" + std::to_string(cfg.svd_iters) +
             ",seed=" + std::to_string(cfg.train.model.seed);
    } else {
      throw ConfigError("--baseline expects pop or puresvd");
    }
  }

  auto report = evaluate(*scorer, data, split, cfg.eval);
  report.model_hash = hash;
  write_output(opt.out, report.json());
  const auto table = report.table(label);
  if (opt.table.empty())
    std::fputs(table.c_str(), stderr);
  else
    write_output(opt.table, table);
  return 0;
}

int cmd_explain(const ExplainOptions& opt, const ConfigSources& src) {
  resolve_config(src);
  const int selected = (opt.user ? 1 : 0) + (opt.modes ? 1 : 0) + (opt.histogram ? 1 : 0);
  if (selected != 1) throw ConfigError("choose exactly one of --user, --modes, --histogram");
  if (opt.k < 1 || opt.n < 1) throw ConfigError("-k and -n must be >= 1");
  const auto data = load_data(data_dir_or_default(opt.data_dir));
  auto m = load_trained(opt.model, data);
  const AmaScorer model(std::move(m.params), std::move(m.emb));

  if (opt.histogram) {
    write_output(opt.out, mode_usage(model, data.train, opt.k).csv());
  } else if (opt.modes) {
    write_output(opt.out, mode_top_items(model, data.train, opt.n).csv(data.items));
  } else {
    if (!data.users.contains(*opt.user)) throw DataError("unknown user '" + *opt.user + "' (no train history)");
    const int u = data.users.at(*opt.user);
    const auto history = data.train.row(u);
    const auto ex = explain_user(model, history, opt.k, u);
    const auto future = data.validation.merged_with(data.test);
    write_output(opt.out, explanation_json(ex, data.users, data.items, future.row(u)));
    if (!opt.dot.empty()) write_output(opt.dot, explanation_dot(ex, data.items, future.row(u)));
  }
  return 0;
}

}  // namespace ama::cli
