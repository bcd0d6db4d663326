#include "ama/dataset.hpp"

#include "ama/errors.hpp"
#include "ama/util.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace ama {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, std::string_view sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + sep.size();
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_rating(std::string_view s, std::size_t line) {
  s = trim(s);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ParseError(line, "bad rating '" + std::string(s) + "'");
  if (!std::isfinite(value)) throw ParseError(line, "rating is not finite");
  return value;
}

std::int64_t parse_timestamp(std::string_view s, std::size_t line) {
  s = trim(s);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
    throw ParseError(line, "bad timestamp '" + std::string(s) + "'");
  if (value < 0) throw ParseError(line, "negative timestamp");
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

RatingFormat parse_format(const std::string& tag) {
  if (tag == "movielens-dat") return RatingFormat::MovielensDat;
  if (tag == "amazon-csv") return RatingFormat::AmazonCsv;
  throw ConfigError("unknown rating format '" + tag + "' (expected movielens-dat or amazon-csv)");
}

std::string format_name(RatingFormat format) {
  return format == RatingFormat::MovielensDat ? "movielens-dat" : "amazon-csv";
}

CsvLayout CsvLayout::parse(const std::string& order) {
  CsvLayout layout{-1, -1, -1, -1};
  const auto fields = split_fields(order, ",");
  if (fields.size() != 4) throw ConfigError("column order needs four fields: " + order);
  for (int i = 0; i < 4; ++i) {
    const auto f = trim(fields[i]);
    int* slot = f == "item" ? &layout.item
              : f == "user" ? &layout.user
              : f == "rating" ? &layout.rating
              : f == "timestamp" ? &layout.timestamp
                                 : nullptr;
    if (slot == nullptr || *slot != -1) throw ConfigError("bad column order: " + order);
    *slot = i;
  }
  return layout;
}

std::vector<RatingEvent> parse_ratings_text(const std::string& text, RatingFormat format,
                                            const CsvLayout& layout) {
  std::vector<RatingEvent> events;
  const std::string_view sep = format == RatingFormat::MovielensDat ? "::" : ",";
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const auto line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;

    const auto fields = split_fields(line, sep);
    if (fields.size() != 4)
      throw ParseError(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
    RatingEvent e;
    if (format == RatingFormat::MovielensDat) {
      e.user_id = std::string(trim(fields[0]));
      e.item_id = std::string(trim(fields[1]));
      e.rating = parse_rating(fields[2], line_no);
      e.timestamp = parse_timestamp(fields[3], line_no);
    } else {
      e.user_id = std::string(trim(fields[layout.user]));
      e.item_id = std::string(trim(fields[layout.item]));
      e.rating = parse_rating(fields[layout.rating], line_no);
      e.timestamp = parse_timestamp(fields[layout.timestamp], line_no);
    }
    if (e.user_id.empty() || e.item_id.empty()) throw ParseError(line_no, "empty id");
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<RatingEvent> parse_ratings(const std::string& path, RatingFormat format,
                                       const CsvLayout& layout) {
  return parse_ratings_text(read_file(path), format, layout);
}

std::vector<RatingEvent> binarize(const std::vector<RatingEvent>& events, double threshold) {
  std::vector<RatingEvent> out;
  for (const auto& e : events) {
    if (e.rating > threshold) {
      out.push_back(e);
      out.back().rating = 1.0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// InteractionMatrix

InteractionMatrix::InteractionMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), offsets_(static_cast<std::size_t>(rows) + 1, 0) {}

InteractionMatrix::InteractionMatrix(int rows, int cols, std::vector<std::vector<int>> row_lists)
    : rows_(rows), cols_(cols) {
  if (static_cast<int>(row_lists.size()) != rows) throw DimensionError("row list count != rows");
  offsets_.assign(1, 0);
  offsets_.reserve(rows + 1);
  for (auto& r : row_lists) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    for (int j : r) {
      if (j < 0 || j >= cols) throw DimensionError("column index " + std::to_string(j) + " out of range");
      indices_.push_back(j);
    }
    offsets_.push_back(indices_.size());
  }
}

bool InteractionMatrix::contains(int i, int j) const {
  const auto r = row(i);
  return std::binary_search(r.begin(), r.end(), j);
}

Eigen::VectorXd InteractionMatrix::column_counts() const {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(cols_);
  for (int j : indices_) counts[j] += 1.0;
  return counts;
}

Eigen::SparseMatrix<double, Eigen::RowMajor> InteractionMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(indices_.size());
  for (int i = 0; i < rows_; ++i)
    for (int j : row(i)) triplets.emplace_back(i, j, 1.0);
  Eigen::SparseMatrix<double, Eigen::RowMajor> s(rows_, cols_);
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

Eigen::VectorXd InteractionMatrix::dense_row(int i) const {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(cols_);
  for (int j : row(i)) r[j] = 1.0;
  return r;
}

InteractionMatrix InteractionMatrix::merged_with(const InteractionMatrix& other) const {
  if (other.rows_ != rows_ || other.cols_ != cols_) throw DimensionError("merge of differently shaped matrices");
  std::vector<std::vector<int>> lists(rows_);
  for (int i = 0; i < rows_; ++i) {
    const auto a = row(i);
    const auto b = other.row(i);
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(lists[i]));
  }
  return InteractionMatrix(rows_, cols_, std::move(lists));
}

// ---------------------------------------------------------------------------
// IdIndex

IdIndex::IdIndex(std::vector<std::string> ids) : ids_(std::move(ids)) {
  for (int i = 0; i < size(); ++i) {
    if (!lookup_.emplace(ids_[i], i).second) throw DataError("duplicate id '" + ids_[i] + "'");
  }
}

int IdIndex::at(const std::string& id) const {
  const auto it = lookup_.find(id);
  if (it == lookup_.end()) throw DataError("unknown id '" + id + "'");
  return it->second;
}

std::string IdIndex::hash() const {
  Fnv1a h;
  for (const auto& id : ids_) {
    h.update(id);
    h.update("\n");
  }
  return h.hex();
}

bool natural_id_less(const std::string& a, const std::string& b) {
  if (all_digits(a) && all_digits(b)) {
    const auto strip = [](const std::string& s) {
      const auto p = s.find_first_not_of('0');
      return p == std::string::npos ? std::string_view("0") : std::string_view(s).substr(p);
    };
    const auto sa = strip(a);
    const auto sb = strip(b);
    if (sa.size() != sb.size()) return sa.size() < sb.size();
    if (sa != sb) return sa < sb;
  }
  return a < b;
}

// ---------------------------------------------------------------------------
// Splitting

void SplitFractions::validate() const {
  if (train < 0 || validation < 0 || test < 0) throw ConfigError("split fractions must be nonnegative");
  if (std::abs(train + validation + test - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
}

SplitEvents split_events(const std::vector<RatingEvent>& events, const SplitFractions& fractions) {
  fractions.validate();
  if (events.empty()) throw DataError("empty event list");

  std::map<std::string, std::vector<const RatingEvent*>, decltype(&natural_id_less)> by_user(&natural_id_less);
  for (const auto& e : events) by_user[e.user_id].push_back(&e);

  // Guards floor() against products such as 0.7 * 10 landing just below an integer.
  constexpr double kFloorSlack = 1e-9;
  const double cut_train = fractions.train;
  const double cut_val = fractions.train + fractions.validation;

  SplitEvents raw;
  for (auto& [user, list] : by_user) {
    std::stable_sort(list.begin(), list.end(), [](const RatingEvent* a, const RatingEvent* b) {
      if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
      return a->item_id < b->item_id;
    });
    // A repeated (user,item) pair keeps its earliest occurrence only.
    std::vector<const RatingEvent*> unique;
    std::unordered_map<std::string, bool> seen;
    for (const auto* e : list)
      if (seen.emplace(e->item_id, true).second) unique.push_back(e);

    const double n = static_cast<double>(unique.size());
    const auto n_train = static_cast<std::size_t>(std::floor(cut_train * n + kFloorSlack));
    const auto n_val_end = std::max(n_train, static_cast<std::size_t>(std::floor(cut_val * n + kFloorSlack)));
    if (n_train == 0) continue;
    for (std::size_t k = 0; k < unique.size(); ++k) {
      auto& dst = k < n_train ? raw.train : k < n_val_end ? raw.validation : raw.test;
      dst.push_back(*unique[k]);
    }
  }

  std::unordered_map<std::string, bool> train_items;
  for (const auto& e : raw.train) train_items.emplace(e.item_id, true);
  const auto keep = [&](std::vector<RatingEvent>& v) {
    std::erase_if(v, [&](const RatingEvent& e) { return !train_items.count(e.item_id); });
  };
  keep(raw.validation);
  keep(raw.test);
  if (raw.train.empty()) throw DataError("empty dataset after splitting");
  return raw;
}

SplitDataset temporal_split(const std::vector<RatingEvent>& events, const SplitFractions& fractions) {
  auto parts = split_events(events, fractions);

  std::vector<std::string> users;
  std::vector<std::string> items;
  for (const auto& e : parts.train) {
    users.push_back(e.user_id);
    items.push_back(e.item_id);
  }
  for (auto* ids : {&users, &items}) {
    std::sort(ids->begin(), ids->end(), natural_id_less);
    ids->erase(std::unique(ids->begin(), ids->end()), ids->end());
  }

  SplitDataset out;
  out.users = IdIndex(std::move(users));
  out.items = IdIndex(std::move(items));
  out.train = build_matrix(parts.train, out.users, out.items);
  out.validation = build_matrix(parts.validation, out.users, out.items);
  out.test = build_matrix(parts.test, out.users, out.items);
  return out;
}

InteractionMatrix build_matrix(const std::vector<RatingEvent>& events, const IdIndex& users,
                               const IdIndex& items) {
  std::vector<std::vector<int>> rows(users.size());
  for (const auto& e : events) rows[users.at(e.user_id)].push_back(items.at(e.item_id));
  return InteractionMatrix(users.size(), items.size(), std::move(rows));
}

// ---------------------------------------------------------------------------
// Split files

namespace {

std::string matrix_csv(const InteractionMatrix& m) {
  std::string out = "user_idx,item_idx\n";
  for (int i = 0; i < m.rows(); ++i)
    for (int j : m.row(i)) {
      out += std::to_string(i);
      out += ',';
      out += std::to_string(j);
      out += '\n';
    }
  return out;
}

InteractionMatrix read_matrix_csv(const std::string& path, int rows, int cols) {
  const auto text = read_file(path);
  std::vector<std::vector<int>> lists(rows);
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const auto line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line_no == 1) continue;
    const auto f = split_fields(line, ",");
    int i = -1;
    int j = -1;
    if (f.size() != 2 || std::from_chars(f[0].data(), f[0].data() + f[0].size(), i).ec != std::errc{} ||
        std::from_chars(f[1].data(), f[1].data() + f[1].size(), j).ec != std::errc{})
      throw ParseError(line_no, "bad split row in " + path);
    if (i < 0 || i >= rows || j < 0 || j >= cols) throw ParseError(line_no, "index out of range in " + path);
    lists[i].push_back(j);
  }
  return InteractionMatrix(rows, cols, std::move(lists));
}

}  // namespace

void write_split(const std::string& dir, const SplitDataset& data, SplitMetadata meta) {
  std::filesystem::create_directories(dir);
  Fnv1a content;
  const std::pair<const char*, const InteractionMatrix*> parts[] = {
      {"train.csv", &data.train}, {"validation.csv", &data.validation}, {"test.csv", &data.test}};
  for (const auto& [name, m] : parts) {
    const auto csv = matrix_csv(*m);
    content.update(csv);
    std::ofstream out(std::filesystem::path(dir) / name, std::ios::binary);
    out << csv;
    if (!out) throw DataError(std::string("cannot write ") + name);
  }
  content.update(data.users.hash());
  content.update(data.items.hash());
  meta.content_hash = content.hex();

  nlohmann::ordered_json j;
  j["source"] = meta.source;
  j["threshold"] = meta.threshold;
  j["fractions"] = {meta.fractions.train, meta.fractions.validation, meta.fractions.test};
  j["users"] = data.users.size();
  j["items"] = data.items.size();
  j["counts"] = {{"train", data.train.nnz()}, {"validation", data.validation.nnz()}, {"test", data.test.nnz()}};
  j["content_hash"] = meta.content_hash;
  j["user_ids"] = data.users.ids();
  j["item_ids"] = data.items.ids();
  std::ofstream out(std::filesystem::path(dir) / "dataset.json", std::ios::binary);
  out << j.dump(1) << '\n';
  if (!out) throw DataError("cannot write dataset.json");
}

SplitDataset read_split(const std::string& dir, SplitMetadata* meta) {
  const auto base = std::filesystem::path(dir);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file((base / "dataset.json").string()));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("bad dataset.json in " + dir + ": " + e.what());
  }
  SplitDataset out;
  out.users = IdIndex(j.at("user_ids").get<std::vector<std::string>>());
  out.items = IdIndex(j.at("item_ids").get<std::vector<std::string>>());
  const int m = out.users.size();
  const int n = out.items.size();
  out.train = read_matrix_csv((base / "train.csv").string(), m, n);
  out.validation = read_matrix_csv((base / "validation.csv").string(), m, n);
  out.test = read_matrix_csv((base / "test.csv").string(), m, n);
  if (meta) {
    meta->source = j.value("source", "");
    meta->threshold = j.value("threshold", 3.0);
    const auto f = j.at("fractions");
    meta->fractions = {f.at(0).get<double>(), f.at(1).get<double>(), f.at(2).get<double>()};
    meta->content_hash = j.value("content_hash", "");
  }
  return out;
}

}  // namespace ama
