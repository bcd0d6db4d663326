#include "ama/eval.hpp"

#include "ama/errors.hpp"
#include "ama/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace ama {

namespace {

int count_hits(std::span<const int> ranked, std::span<const int> relevant, std::size_t upto) {
  int hits = 0;
  const auto limit = std::min(upto, ranked.size());
  for (std::size_t i = 0; i < limit; ++i)
    if (std::binary_search(relevant.begin(), relevant.end(), ranked[i])) ++hits;
  return hits;
}

void require_relevant(std::span<const int> relevant) {
  if (relevant.empty()) throw DataError("metric undefined for an empty relevant set");
}

}  // namespace

RankedList rank_topk(const Eigen::VectorXd& scores, const std::vector<std::span<const int>>& exclude, int k,
                     int user) {
  if (k < 1) throw ConfigError("K must be >= 1");
  const auto n = static_cast<int>(scores.size());
  std::vector<char> skip(n, 0);
  for (const auto& ex : exclude)
    for (int j : ex) skip[j] = 1;
  std::vector<int> candidates;
  candidates.reserve(n);
  for (int j = 0; j < n; ++j)
    if (!skip[j]) candidates.push_back(j);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  candidates.resize(take);
  return {user, std::move(candidates)};
}

RankedList rank_topk(const Eigen::VectorXd& scores, std::initializer_list<std::span<const int>> exclude, int k,
                     int user) {
  return rank_topk(scores, std::vector<std::span<const int>>(exclude), k, user);
}

double precision_at_k(std::span<const int> ranked, std::span<const int> relevant, int k) {
  require_relevant(relevant);
  return static_cast<double>(count_hits(ranked, relevant, k)) / k;
}

double recall_at_k(std::span<const int> ranked, std::span<const int> relevant, int k) {
  require_relevant(relevant);
  return static_cast<double>(count_hits(ranked, relevant, k)) / static_cast<double>(relevant.size());
}

double average_precision_at_k(std::span<const int> ranked, std::span<const int> relevant, int k) {
  require_relevant(relevant);
  double sum = 0.0;
  int hits = 0;
  const auto limit = std::min<std::size_t>(k, ranked.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (std::binary_search(relevant.begin(), relevant.end(), ranked[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min<std::size_t>(k, relevant.size()));
}

double r_precision(std::span<const int> ranked, std::span<const int> relevant) {
  require_relevant(relevant);
  return static_cast<double>(count_hits(ranked, relevant, relevant.size())) / static_cast<double>(relevant.size());
}

double ndcg(std::span<const int> ranked, std::span<const int> relevant, int cap) {
  require_relevant(relevant);
  const std::size_t limit = cap > 0 ? std::min<std::size_t>(cap, ranked.size()) : ranked.size();
  const std::size_t ideal_len = std::min<std::size_t>(cap > 0 ? cap : ranked.size(), relevant.size());
  double dcg = 0.0;
  for (std::size_t i = 0; i < limit; ++i)
    if (std::binary_search(relevant.begin(), relevant.end(), ranked[i])) dcg += 1.0 / std::log2(i + 2.0);
  double idcg = 0.0;
  for (std::size_t i = 0; i < ideal_len; ++i) idcg += 1.0 / std::log2(i + 2.0);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

SplitName parse_split(const std::string& tag) {
  if (tag == "validation") return SplitName::Validation;
  if (tag == "test") return SplitName::Test;
  throw ConfigError("unknown split '" + tag + "' (expected validation or test)");
}

std::string split_name(SplitName split) { return split == SplitName::Validation ? "validation" : "test"; }

std::vector<std::string> metric_columns(const std::vector<int>& ks) {
  std::vector<std::string> cols{"R-Precision", "NDCG"};
  for (const char* name : {"MAP", "Precision", "Recall"})
    for (int k : ks) cols.push_back(std::string(name) + "@" + std::to_string(k));
  return cols;
}

UserMetrics evaluate_user(const Scorer& scorer, std::span<const int> history, std::span<const int> relevant,
                          int user, const EvalOptions& opt) {
  const int max_k = *std::max_element(opt.ks.begin(), opt.ks.end());
  const int list_length = std::max(max_k, opt.list_length);
  const int depth = std::max<int>(list_length, static_cast<int>(relevant.size()));
  const auto ranked = rank_topk(scorer.score(history, user), {history}, depth, user);
  const std::span<const int> items(ranked.items);

  UserMetrics m;
  m.user = user;
  m.values.push_back(r_precision(items, relevant));
  m.values.push_back(ndcg(items.first(std::min<std::size_t>(list_length, items.size())), relevant));
  for (int k : opt.ks) m.values.push_back(average_precision_at_k(items, relevant, k));
  for (int k : opt.ks) m.values.push_back(precision_at_k(items, relevant, k));
  for (int k : opt.ks) m.values.push_back(recall_at_k(items, relevant, k));
  return m;
}

RankingReport summarize(const std::vector<UserMetrics>& rows, const std::vector<int>& ks) {
  RankingReport report;
  report.ks = ks;
  report.order = metric_columns(ks);
  report.users = static_cast<int>(rows.size());
  for (std::size_t c = 0; c < report.order.size(); ++c) {
    MetricStat stat;
    if (!rows.empty()) {
      double sum = 0.0;
      for (const auto& r : rows) sum += r.values[c];
      const double n = static_cast<double>(rows.size());
      stat.mean = sum / n;
      if (rows.size() > 1) {
        double sq = 0.0;
        for (const auto& r : rows) sq += (r.values[c] - stat.mean) * (r.values[c] - stat.mean);
        stat.ci = 1.96 * std::sqrt(sq / (n - 1.0)) / std::sqrt(n);
      }
    }
    report.metrics[report.order[c]] = stat;
  }
  return report;
}

RankingReport evaluate(const Scorer& scorer, const SplitDataset& data, SplitName split, const EvalOptions& opt) {
  if (opt.ks.empty()) throw ConfigError("at least one K is required");
  for (int k : opt.ks)
    if (k < 1) throw ConfigError("K must be >= 1");
  if (scorer.items() != data.train.cols()) throw DimensionError("scorer item count does not match the dataset");

  const InteractionMatrix history = split == SplitName::Validation ? data.train : data.train.merged_with(data.validation);
  const InteractionMatrix& target = split == SplitName::Validation ? data.validation : data.test;

  std::vector<int> users;
  for (int i = 0; i < target.rows(); ++i)
    if (!target.row(i).empty() && !history.row(i).empty()) users.push_back(i);

  std::vector<UserMetrics> rows(users.size());
  parallel_for(users.size(), [&](std::size_t k) {
    const int u = users[k];
    rows[k] = evaluate_user(scorer, history.row(u), target.row(u), u, opt);
  });
  auto report = summarize(rows, opt.ks);
  report.split = split_name(split);
  return report;
}

std::string RankingReport::json() const {
  nlohmann::ordered_json j;
  j["split"] = split;
  j["users"] = users;
  j["ks"] = ks;
  j["model_hash"] = model_hash;
  nlohmann::ordered_json m;
  for (const auto& name : order) m[name] = {{"mean", metrics.at(name).mean}, {"ci", metrics.at(name).ci}};
  j["metrics"] = m;
  return j.dump(1);
}

std::string RankingReport::table(const std::string& label) const {
  std::ostringstream out;
  out << "Model";
  for (const auto& name : order) out << " | " << name;
  out << "\n" << label;
  char buf[32];
  for (const auto& name : order) {
    std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * metrics.at(name).mean);
    out << " | " << buf;
  }
  out << "\n";
  return out.str();
}

}  // namespace ama
