#pragma once

#include "penreg/groups.hpp"
#include "penreg/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace penreg {

/// Predictor matrix, response vector and optional group labels.
///
/// Rows are observations. Group labels, when present, are stored remapped
/// to dense ids in first-appearance order. Immutable after construction.
class Dataset {
 public:
  Dataset(MatrixXd x, VectorXd y, std::optional<std::vector<int>> group_labels = std::nullopt,
          std::vector<std::string> predictor_names = {}, std::string response_name = "y");

  const MatrixXd& x() const { return x_; }
  const VectorXd& y() const { return y_; }
  Index rows() const { return x_.rows(); }
  Index cols() const { return x_.cols(); }

  bool has_groups() const { return groups_.has_value(); }
  /// Null when no group index was supplied.
  const GroupStructure* groups() const { return groups_ ? &*groups_ : nullptr; }

  const std::vector<std::string>& predictor_names() const { return predictor_names_; }
  const std::string& response_name() const { return response_name_; }

  /// Rows selected in the given order; group labels carry over.
  Dataset subset(std::span<const Index> rows) const;

 private:
  MatrixXd x_;
  VectorXd y_;
  std::optional<GroupStructure> groups_;
  std::vector<std::string> predictor_names_;
  std::string response_name_;
};

/// Train/test (and optionally validate) row indices. Parts are disjoint.
struct SplitIndices {
  IndexList train;
  IndexList validate;
  IndexList test;
};

SplitIndices train_test_split(Index nrows, std::optional<Index> train_size = std::nullopt,
                              double train_pct = 0.7,
                              std::optional<std::uint64_t> seed = std::nullopt);

// ---------------------------------------------------------------------------
// CSV

using ColumnRef = std::variant<std::string, Index>;

/// Reads an RFC-4180 CSV with a header row. The response column is removed
/// and the remaining columns, in file order, become predictors. With
/// `group_row` set, the first record after the header carries one group
/// label per column (the response cell is ignored).
Dataset load_csv(const std::filesystem::path& path, const ColumnRef& response,
                 bool group_row = false);

/// Same, with group labels read from a one-row sidecar file.
Dataset load_csv(const std::filesystem::path& path, const ColumnRef& response,
                 const std::filesystem::path& group_file);

/// Parses a single comma-separated row of integer labels.
std::vector<int> load_group_file(const std::filesystem::path& path);

/// Numeric matrix with header; every column numeric.
struct Table {
  std::vector<std::string> header;
  MatrixXd values;
};
Table load_table(const std::filesystem::path& path);

/// Writes predictors then response, 17 significant digits.
void write_csv(const std::filesystem::path& path, const Dataset& data);
void write_group_file(const std::filesystem::path& path, const GroupStructure& groups);
void write_table(const std::filesystem::path& path, const Table& table);

/// Shortest-safe text form of a double: 17 significant digits.
std::string format_real(double value);

// ---------------------------------------------------------------------------
// Standardization (opt-in)

/// Column centering and scaling estimated on one matrix and reused on others.
/// Zero-variance columns keep scale 1.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const MatrixXd& x);
  MatrixXd apply(const MatrixXd& x) const;
  Dataset apply(const Dataset& data) const;
};

// ---------------------------------------------------------------------------
// Synthetic data

struct GroupedDesign {
  Index n_obs = 1000;
  Index group_size = 10;
  Index num_groups = 10;
  Index non_zero_groups = 5;
  Index non_zero_coef = 6;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

struct SparseDesign {
  Index n_samples = 100;
  Index n_features = 200;
  Index n_informative = 10;
  double bias = 0.0;
  double noise = 1.0;
  std::uint64_t seed = 0;
};

struct SyntheticTruth {
  VectorXd beta_true;
  double bias = 0.0;
  std::variant<GroupedDesign, SparseDesign> design;
};

/// Standard normal predictors in contiguous groups; the first
/// `non_zero_coef` coefficients of each of the first `non_zero_groups`
/// groups are drawn uniform on [5, 10] with a random sign.
std::pair<Dataset, SyntheticTruth> generate_grouped(const GroupedDesign& design);

/// Ungrouped analog: `n_informative` randomly placed nonzero coefficients
/// and an intercept `bias`.
std::pair<Dataset, SyntheticTruth> generate_sparse(const SparseDesign& design);

}  // namespace penreg
