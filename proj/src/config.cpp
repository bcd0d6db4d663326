#include "ama/config.hpp"

#include "ama/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace ama {

Algorithm parse_algorithm(const std::string& tag) {
  if (tag == "ama") return Algorithm::Ama;
  if (tag == "pop") return Algorithm::Pop;
  if (tag == "puresvd") return Algorithm::PureSvd;
  throw ConfigError("unknown algorithm '" + tag + "' (expected ama, pop or puresvd)");
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Ama: return "ama";
    case Algorithm::Pop: return "pop";
    case Algorithm::PureSvd: return "puresvd";
  }
  return "ama";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(to_int("list", trim(item))));
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"algorithm", "", "ama | pop | puresvd"},
      {"format", "", "rating file format: movielens-dat | amazon-csv"},
      {"column_order", "", "amazon-csv field order, default item,user,rating,timestamp"},
      {"threshold", "vartheta", "binarization threshold; ratings > threshold are positive"},
      {"train_fraction", "", "per-user chronological train share (0.5)"},
      {"validation_fraction", "", "validation share (0.2)"},
      {"test_fraction", "", "test share (0.3)"},
      {"h", "h", "item embedding / latent size (PureSVD rank for algorithm=puresvd)"},
      {"d", "d", "number of user preference modes"},
      {"kappa", "kappa", "key and query size"},
      {"alpha", "alpha", "confidence weight: c = 1 + alpha ln(1 + r)"},
      {"lambda", "lambda", "decoder regularization on S"},
      {"rho", "rho", "input corruption rate"},
      {"epochs", "epsilon", "training epochs"},
      {"svd_iters", "gamma", "randomized SVD power iterations"},
      {"oversample", "", "randomized SVD oversampling columns"},
      {"embed_scale", "", "item embedding scaling: none | sqrt-sigma"},
      {"nce", "NCE", "reserved; NCE embedding initialization is not supported"},
      {"seed", "", "random seed for SVD, initialization, shuffling and corruption"},
      {"learning_rate", "", "optimizer step size"},
      {"batch_size", "", "users per optimizer step"},
      {"optimizer", "", "adam | sgd"},
      {"checkpoint_every", "", "write a checkpoint every N epochs (0 = off)"},
      {"eval_every", "", "validation evaluation every N epochs (0 = off)"},
      {"select_best", "", "keep the parameters with the best validation R-Precision"},
      {"ks", "K", "comma-separated cutoffs for MAP/Precision/Recall"},
      {"list_length", "", "recommended-list length scored by NDCG"},
      {"threads", "", "worker threads; results do not depend on it"},
  };
  return keys;
}

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const auto key = trim(raw_key);
  const auto v = trim(raw_value);
  auto& m = train.model;
  if (key == "algorithm") algorithm = parse_algorithm(v);
  else if (key == "format") format = parse_format(v);
  else if (key == "column_order") { CsvLayout::parse(v); column_order = v; }
  else if (key == "threshold") threshold = to_double(key, v);
  else if (key == "train_fraction") fractions.train = to_double(key, v);
  else if (key == "validation_fraction") fractions.validation = to_double(key, v);
  else if (key == "test_fraction") fractions.test = to_double(key, v);
  else if (key == "h") m.h = static_cast<int>(to_int(key, v));
  else if (key == "d") m.d = static_cast<int>(to_int(key, v));
  else if (key == "kappa") m.kappa = static_cast<int>(to_int(key, v));
  else if (key == "alpha") m.alpha = to_double(key, v);
  else if (key == "lambda") m.lambda = to_double(key, v);
  else if (key == "rho") m.rho = to_double(key, v);
  else if (key == "epochs") m.epochs = static_cast<int>(to_int(key, v));
  else if (key == "seed") m.seed = static_cast<std::uint64_t>(to_int(key, v));
  else if (key == "nce") m.nce = to_bool(key, v);
  else if (key == "svd_iters") svd_iters = static_cast<int>(to_int(key, v));
  else if (key == "oversample") oversample = static_cast<int>(to_int(key, v));
  else if (key == "embed_scale") embed_scale = parse_embedding_scale(v);
  else if (key == "learning_rate") train.learning_rate = to_double(key, v);
  else if (key == "batch_size") train.batch_size = static_cast<int>(to_int(key, v));
  else if (key == "optimizer") train.optimizer = parse_optimizer(v);
  else if (key == "checkpoint_every") train.checkpoint_every = static_cast<int>(to_int(key, v));
  else if (key == "eval_every") train.eval_every = static_cast<int>(to_int(key, v));
  else if (key == "select_best") train.select_best = to_bool(key, v);
  else if (key == "ks") eval.ks = parse_int_list(v);
  else if (key == "list_length") eval.list_length = static_cast<int>(to_int(key, v));
  else if (key == "threads") threads = static_cast<unsigned>(std::max(1LL, to_int(key, v)));
  else throw ConfigError("unknown config key '" + key + "'");
}

void RunConfig::load_text(const std::string& text, const std::string& origin) {
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      set(line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  load_text(buf.str(), path);
}

void RunConfig::validate() const {
  if (!std::isfinite(threshold)) throw ConfigError("threshold must be finite");
  fractions.validate();
  CsvLayout::parse(column_order);
  if (svd_iters < 0) throw ConfigError("svd_iters must be >= 0");
  if (oversample < 0) throw ConfigError("oversample must be >= 0");
  if (eval.ks.empty()) throw ConfigError("ks must not be empty");
  for (int k : eval.ks)
    if (k < 1) throw ConfigError("every K must be >= 1");
  if (eval.list_length < 1) throw ConfigError("list_length must be >= 1");
  train.validate();
}

std::string RunConfig::dump() const {
  const auto& m = train.model;
  std::ostringstream out;
  out.precision(17);
  out << "algorithm = " << algorithm_name(algorithm) << '\n'
      << "format = " << format_name(format) << '\n'
      << "column_order = " << column_order << '\n'
      << "threshold = " << threshold << '\n'
      << "train_fraction = " << fractions.train << '\n'
      << "validation_fraction = " << fractions.validation << '\n'
      << "test_fraction = " << fractions.test << '\n'
      << "h = " << m.h << '\n'
      << "d = " << m.d << '\n'
      << "kappa = " << m.kappa << '\n'
      << "alpha = " << m.alpha << '\n'
      << "lambda = " << m.lambda << '\n'
      << "rho = " << m.rho << '\n'
      << "epochs = " << m.epochs << '\n'
      << "svd_iters = " << svd_iters << '\n'
      << "oversample = " << oversample << '\n'
      << "embed_scale = " << embedding_scale_name(embed_scale) << '\n'
      << "nce = " << (m.nce ? "true" : "false") << '\n'
      << "seed = " << m.seed << '\n'
      << "learning_rate = " << train.learning_rate << '\n'
      << "batch_size = " << train.batch_size << '\n'
      << "optimizer = " << optimizer_name(train.optimizer) << '\n'
      << "checkpoint_every = " << train.checkpoint_every << '\n'
      << "eval_every = " << train.eval_every << '\n'
      << "select_best = " << (train.select_best ? "true" : "false") << '\n'
      << "ks = ";
  for (std::size_t i = 0; i < eval.ks.size(); ++i) out << (i ? "," : "") << eval.ks[i];
  out << '\n' << "list_length = " << eval.list_length << '\n' << "threads = " << threads << '\n';
  return out.str();
}

namespace {

// Best settings per dataset and algorithm. kappa is 3 for MovieLens-1M and
// 10 elsewhere.
const std::map<std::string, std::string>& preset_table() {
  static const std::map<std::string, std::string> table = {
      {"ml1m-ama",
       "algorithm=ama\nformat=movielens-dat\nh=40\nalpha=1\nlambda=1e-5\nepochs=300\nsvd_iters=10\nrho=0.3\nd=3\n"
       "kappa=3\n"},
      {"ml1m-pop", "algorithm=pop\nformat=movielens-dat\n"},
      {"ml1m-puresvd", "algorithm=puresvd\nformat=movielens-dat\nh=50\nlambda=1\nepochs=10\nsvd_iters=10\n"},
      {"amazon-music-ama",
       "algorithm=ama\nformat=amazon-csv\nh=200\nalpha=10\nlambda=1e-4\nepochs=300\nsvd_iters=10\nrho=0.4\nd=5\n"
       "kappa=10\n"},
      {"amazon-music-pop", "algorithm=pop\nformat=amazon-csv\n"},
      {"amazon-music-puresvd", "algorithm=puresvd\nformat=amazon-csv\nh=200\nsvd_iters=10\n"},
      {"amazon-games-ama",
       "algorithm=ama\nformat=amazon-csv\nh=100\nalpha=10\nlambda=1e-3\nepochs=300\nsvd_iters=10\nrho=0.4\nd=1\n"
       "kappa=10\n"},
      {"amazon-games-pop", "algorithm=pop\nformat=amazon-csv\n"},
      {"amazon-games-puresvd", "algorithm=puresvd\nformat=amazon-csv\nh=100\nlambda=1\nsvd_iters=10\n"},
  };
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : preset_table()) names.push_back(name);
  return names;
}

RunConfig preset(const std::string& name) {
  const auto& table = preset_table();
  const auto it = table.find(name);
  if (it == table.end()) throw ConfigError("unknown preset '" + name + "'");
  RunConfig cfg;
  cfg.load_text(it->second, "preset " + name);
  return cfg;
}

}  // namespace ama
