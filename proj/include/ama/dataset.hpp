#pragma once

#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ama {

struct RatingEvent {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;
  std::int64_t timestamp = 0;

  bool operator==(const RatingEvent&) const = default;
};

enum class RatingFormat { MovielensDat, AmazonCsv };

RatingFormat parse_format(const std::string& tag);
std::string format_name(RatingFormat format);

/// Field positions for amazon-csv. The default is item,user,rating,timestamp.
struct CsvLayout {
  int item = 0;
  int user = 1;
  int rating = 2;
  int timestamp = 3;

  static CsvLayout parse(const std::string& order);  // e.g. "item,user,rating,timestamp"
};

std::vector<RatingEvent> parse_ratings(const std::string& path, RatingFormat format,
                                       const CsvLayout& layout = {});
std::vector<RatingEvent> parse_ratings_text(const std::string& text, RatingFormat format,
                                            const CsvLayout& layout = {});

/// Keeps the events with rating > threshold and sets their rating to 1.
std::vector<RatingEvent> binarize(const std::vector<RatingEvent>& events, double threshold);

/// Binary user-by-item matrix in CSR layout. Column indices are strictly
/// increasing within each row.
class InteractionMatrix {
 public:
  InteractionMatrix() = default;
  InteractionMatrix(int rows, int cols);
  /// Builds from per-row column lists; duplicates collapse, order is normalized.
  InteractionMatrix(int rows, int cols, std::vector<std::vector<int>> row_lists);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return indices_.size(); }

  std::span<const int> row(int i) const {
    return {indices_.data() + offsets_[i], indices_.data() + offsets_[i + 1]};
  }
  bool contains(int i, int j) const;

  /// Per-item interaction counts.
  Eigen::VectorXd column_counts() const;
  Eigen::SparseMatrix<double, Eigen::RowMajor> to_sparse() const;
  Eigen::VectorXd dense_row(int i) const;

  /// Row-wise union; both operands must share the shape.
  InteractionMatrix merged_with(const InteractionMatrix& other) const;

  bool operator==(const InteractionMatrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> indices_;
};

/// Ordered bijection between external ids and dense indices.
class IdIndex {
 public:
  IdIndex() = default;
  explicit IdIndex(std::vector<std::string> ids);

  int size() const { return static_cast<int>(ids_.size()); }
  const std::string& id(int index) const { return ids_.at(index); }
  const std::vector<std::string>& ids() const { return ids_; }
  bool contains(const std::string& id) const { return lookup_.count(id) != 0; }
  /// Throws DataError naming the id when it is unknown.
  int at(const std::string& id) const;

  std::string hash() const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> lookup_;
};

struct SplitFractions {
  double train = 0.5;
  double validation = 0.2;
  double test = 0.3;

  void validate() const;
};

struct SplitEvents {
  std::vector<RatingEvent> train;
  std::vector<RatingEvent> validation;
  std::vector<RatingEvent> test;
};

struct SplitDataset {
  InteractionMatrix train;
  InteractionMatrix validation;
  InteractionMatrix test;
  IdIndex users;
  IdIndex items;
};

/// Per-user chronological split after filtering: users with no train events
/// and items absent from train are removed from every split.
SplitEvents split_events(const std::vector<RatingEvent>& events, const SplitFractions& fractions = {});
SplitDataset temporal_split(const std::vector<RatingEvent>& events, const SplitFractions& fractions = {});

InteractionMatrix build_matrix(const std::vector<RatingEvent>& events, const IdIndex& users,
                               const IdIndex& items);

/// Orders ids numerically when both are digit strings, otherwise lexicographically.
bool natural_id_less(const std::string& a, const std::string& b);

struct SplitMetadata {
  double threshold = 3.0;
  SplitFractions fractions;
  std::string source;
  std::string content_hash;
};

/// Writes train.csv, validation.csv, test.csv (user_idx,item_idx) and dataset.json.
void write_split(const std::string& dir, const SplitDataset& data, SplitMetadata meta);
SplitDataset read_split(const std::string& dir, SplitMetadata* meta = nullptr);

}  // namespace ama
