#include "ama/explain.hpp"

#include "ama/errors.hpp"
#include "ama/eval.hpp"
#include "ama/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

namespace ama {

UserExplanation explain_user(const AmaScorer& model, std::span<const int> history, int k, int user) {
  if (history.empty()) throw DataError("user " + std::to_string(user) + " has an empty history");
  const auto enc = model.encode(history);
  const Eigen::MatrixXd per_mode = mode_scores(enc.modes, model.params().decoder);
  const auto pred = maxout(per_mode);

  UserExplanation ex;
  ex.user = user;
  ex.attention.resize(enc.attention.rows());
  for (Eigen::Index l = 0; l < enc.attention.rows(); ++l)
    for (Eigen::Index t = 0; t < enc.attention.cols(); ++t)
      ex.attention[l].push_back({history[t], enc.attention(l, t)});

  for (int j : rank_topk(pred.scores, {history}, k, user).items)
    ex.recommendations.push_back({j, pred.scores[j], pred.mode_of[j], per_mode.col(j)});
  return ex;
}

int ModeUsageHistogram::total() const { return std::accumulate(users_by_modes.begin(), users_by_modes.end(), 0); }

std::string ModeUsageHistogram::csv() const {
  std::ostringstream out;
  out << "modes_used,users\n";
  for (std::size_t c = 0; c < users_by_modes.size(); ++c) out << c + 1 << ',' << users_by_modes[c] << '\n';
  return out.str();
}

ModeUsageHistogram mode_usage(const AmaScorer& model, const InteractionMatrix& history, int k) {
  const int d = static_cast<int>(model.params().encoder.queries.rows());
  std::vector<int> used(history.rows(), 0);
  parallel_for(static_cast<std::size_t>(history.rows()), [&](std::size_t i) {
    const auto row = history.row(static_cast<int>(i));
    if (row.empty()) return;
    const auto pred = model.predict(row);
    std::set<int> modes;
    for (int j : rank_topk(pred.scores, {row}, k).items) modes.insert(pred.mode_of[j]);
    used[i] = static_cast<int>(modes.size());
  });
  ModeUsageHistogram hist;
  hist.users_by_modes.assign(d, 0);
  for (int c : used)
    if (c > 0) ++hist.users_by_modes[c - 1];
  return hist;
}

Eigen::MatrixXd aggregated_attention(const AmaScorer& model, const InteractionMatrix& history) {
  const auto d = model.params().encoder.queries.rows();
  std::vector<Eigen::MatrixXd> per_user(history.rows());
  parallel_for(static_cast<std::size_t>(history.rows()), [&](std::size_t i) {
    const auto row = history.row(static_cast<int>(i));
    if (!row.empty()) per_user[i] = model.encode(row).attention;
  });
  Eigen::MatrixXd total = Eigen::MatrixXd::Zero(d, history.cols());
  for (int i = 0; i < history.rows(); ++i) {
    const auto row = history.row(i);
    for (std::size_t t = 0; t < row.size(); ++t) total.col(row[t]) += per_user[i].col(static_cast<Eigen::Index>(t));
  }
  return total;
}

ModeTopItems mode_top_items(const AmaScorer& model, const InteractionMatrix& history, int n) {
  const Eigen::MatrixXd total = aggregated_attention(model, history);
  const Eigen::VectorXd counts = history.column_counts();

  std::vector<int> by_popularity(history.cols());
  std::iota(by_popularity.begin(), by_popularity.end(), 0);
  std::stable_sort(by_popularity.begin(), by_popularity.end(),
                   [&](int a, int b) { return counts[a] > counts[b]; });
  std::vector<int> pop_rank(history.cols());
  for (std::size_t r = 0; r < by_popularity.size(); ++r) pop_rank[by_popularity[r]] = static_cast<int>(r) + 1;

  ModeTopItems out;
  for (Eigen::Index l = 0; l < total.rows(); ++l) {
    const Eigen::VectorXd mass = total.row(l).transpose();
    std::vector<ModeTopItem> items;
    for (int j : rank_topk(mass, {}, n).items)
      items.push_back({j, mass[j], pop_rank[j], static_cast<int>(counts[j])});
    out.modes.push_back(std::move(items));
  }
  return out;
}

std::string ModeTopItems::csv(const IdIndex& items) const {
  std::ostringstream out;
  out.precision(10);
  out << "mode,rank,item_id,aggregated_attention,popularity_rank,popularity_count\n";
  for (std::size_t l = 0; l < modes.size(); ++l)
    for (std::size_t r = 0; r < modes[l].size(); ++r) {
      const auto& e = modes[l][r];
      out << l << ',' << r + 1 << ',' << items.id(e.item) << ',' << e.attention << ',' << e.popularity_rank << ','
          << e.popularity_count << '\n';
    }
  return out.str();
}

std::string explanation_json(const UserExplanation& ex, const IdIndex& users, const IdIndex& items,
                             std::span<const int> hits) {
  nlohmann::ordered_json j;
  j["user"] = ex.user >= 0 && ex.user < users.size() ? users.id(ex.user) : std::to_string(ex.user);
  j["user_index"] = ex.user;
  nlohmann::ordered_json modes = nlohmann::ordered_json::array();
  for (std::size_t l = 0; l < ex.attention.size(); ++l) {
    auto sorted = ex.attention[l];
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const auto& a : sorted) list.push_back({{"item", items.id(a.item)}, {"weight", a.weight}});
    modes.push_back({{"mode", l}, {"attention", list}});
  }
  j["modes"] = modes;
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < ex.recommendations.size(); ++r) {
    const auto& rec = ex.recommendations[r];
    std::vector<double> scores(rec.mode_scores.data(), rec.mode_scores.data() + rec.mode_scores.size());
    recs.push_back({{"rank", r + 1},
                    {"item", items.id(rec.item)},
                    {"score", rec.score},
                    {"mode", rec.mode},
                    {"mode_scores", scores},
                    {"hit", std::binary_search(hits.begin(), hits.end(), rec.item)}});
  }
  j["recommendations"] = recs;
  return j.dump(1);
}

std::string explanation_dot(const UserExplanation& ex, const IdIndex& items, std::span<const int> hits,
                            int per_mode) {
  std::ostringstream out;
  out << "digraph explanation {\n  rankdir=LR;\n  node [shape=box];\n";
  std::set<int> shown;
  for (std::size_t l = 0; l < ex.attention.size(); ++l) {
    auto sorted = ex.attention[l];
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.weight > b.weight; });
    if (static_cast<int>(sorted.size()) > per_mode) sorted.resize(per_mode);
    for (const auto& a : sorted) {
      if (shown.insert(a.item).second)
        out << "  h" << a.item << " [label=\"" << items.id(a.item) << "\"];\n";
      char w[32];
      std::snprintf(w, sizeof w, "%.3f", a.weight);
      out << "  h" << a.item << " -> m" << l << " [label=\"" << w << "\"];\n";
    }
    out << "  m" << l << " [shape=ellipse, label=\"mode " << l << "\"];\n";
  }
  for (std::size_t r = 0; r < ex.recommendations.size(); ++r) {
    const auto& rec = ex.recommendations[r];
    const bool hit = std::binary_search(hits.begin(), hits.end(), rec.item);
    out << "  r" << rec.item << " [label=\"" << r + 1 << ". " << items.id(rec.item) << "\""
        << (hit ? ", color=red, fontcolor=red" : "") << "];\n";
    out << "  m" << rec.mode << " -> r" << rec.item << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace ama
