#include "commands.hpp"

#include "ama/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

namespace {

void add_config_options(CLI::App* cmd, ama::cli::ConfigSources& src) {
  cmd->add_option("--preset", src.preset, "built-in hyper-parameter preset (e.g. ml1m-ama)");
  cmd->add_option("--config", src.config_file, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", src.overrides, "override one config key: --set key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ama::cli;

  CLI::App app{"Attentive multi-modal autoencoder recommender: data prep, embedding, training, evaluation, explanation"};
  app.footer(config_help());
  app.require_subcommand(1);
  app.fallthrough();

  ConfigSources src;
  app.add_option("--threads", src.threads, "worker threads (results do not depend on this)");

  PrepOptions prep;
  auto* prep_cmd = app.add_subcommand("prep", "binarize ratings and write the chronological train/validation/test split");
  prep_cmd->add_option("--input,-i", prep.input, "rating file")->required();
  prep_cmd->add_option("--format", prep.format, "movielens-dat | amazon-csv");
  prep_cmd->add_option("--threshold", prep.threshold, "keep ratings strictly above this value");
  prep_cmd->add_option("--column-order", prep.column_order, "amazon-csv field order");
  prep_cmd->add_option("--out,-o", prep.out_dir, "output directory")->required();
  add_config_options(prep_cmd, src);

  EmbedOptions embed;
  auto* embed_cmd = app.add_subcommand("embed", "randomized SVD item embeddings from the train split");
  embed_cmd->add_option("--data,-d", embed.data_dir, "split directory (default $AMA_DATA_DIR)");
  embed_cmd->add_option("--out,-o", embed.out, "embedding file")->required();
  add_config_options(embed_cmd, src);

  TrainOptions tr;
  auto* train_cmd = app.add_subcommand("train", "embed and train an AMA model");
  train_cmd->add_option("--data,-d", tr.data_dir, "split directory (default $AMA_DATA_DIR)");
  train_cmd->add_option("--out,-o", tr.out_model, "model file")->required();
  train_cmd->add_option("--embeddings", tr.embeddings, "precomputed embedding file");
  train_cmd->add_option("--checkpoint-dir", tr.checkpoint_dir, "checkpoint directory");
  train_cmd->add_flag("--quiet,-q", tr.quiet, "no per-epoch progress");
  add_config_options(train_cmd, src);

  EvaluateOptions ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "top-N ranking metrics for a model or baseline");
  eval_cmd->add_option("--model,-m", ev.model, "trained model file");
  eval_cmd->add_option("--baseline,-b", ev.baseline, "pop | puresvd");
  eval_cmd->add_option("--data,-d", ev.data_dir, "split directory (default $AMA_DATA_DIR)");
  eval_cmd->add_option("--split", ev.split, "validation | test");
  eval_cmd->add_option("--ks", ev.ks, "comma-separated cutoffs, default 5,10,20");
  eval_cmd->add_option("--out,-o", ev.out, "JSON report path, - for stdout");
  eval_cmd->add_option("--table", ev.table, "human-readable table path (default stderr)");
  add_config_options(eval_cmd, src);

  EvaluateOptions bl;
  auto* baseline_cmd = app.add_subcommand("baseline", "shorthand for evaluate --baseline NAME");
  baseline_cmd->add_option("name", bl.baseline, "pop | puresvd")->required();
  baseline_cmd->add_option("--data,-d", bl.data_dir, "split directory (default $AMA_DATA_DIR)");
  baseline_cmd->add_option("--split", bl.split, "validation | test");
  baseline_cmd->add_option("--ks", bl.ks, "comma-separated cutoffs, default 5,10,20");
  baseline_cmd->add_option("--out,-o", bl.out, "JSON report path, - for stdout");
  baseline_cmd->add_option("--table", bl.table, "human-readable table path (default stderr)");
  add_config_options(baseline_cmd, src);

  ExplainOptions ex;
  auto* explain_cmd = app.add_subcommand("explain", "attention and mode attribution reports");
  explain_cmd->add_option("--model,-m", ex.model, "trained model file")->required();
  explain_cmd->add_option("--data,-d", ex.data_dir, "split directory (default $AMA_DATA_DIR)");
  explain_cmd->add_option("--user", ex.user, "external user id: per-user JSON report");
  explain_cmd->add_flag("--modes", ex.modes, "top attended items per mode (CSV)");
  explain_cmd->add_flag("--histogram", ex.histogram, "distinct modes used by each user's top-K (CSV)");
  explain_cmd->add_option("-k", ex.k, "recommendation list length");
  explain_cmd->add_option("-n", ex.n, "items per mode for --modes");
  explain_cmd->add_option("--out,-o", ex.out, "report path, - for stdout");
  explain_cmd->add_option("--dot", ex.dot, "Graphviz file for --user");
  add_config_options(explain_cmd, src);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*prep_cmd) return cmd_prep(prep, src);
    if (*embed_cmd) return cmd_embed(embed, src);
    if (*train_cmd) return cmd_train(tr, src);
    if (*eval_cmd) return cmd_evaluate(ev, src);
    if (*baseline_cmd) return cmd_evaluate(bl, src);
    if (*explain_cmd) return cmd_explain(ex, src);
  } catch (const ama::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
