#include "penreg/dataset.hpp"

#include "penreg/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace penreg {

namespace {

std::string record_label(std::size_t record) { return "record " + std::to_string(record + 1); }

}  // namespace

Dataset::Dataset(MatrixXd x, VectorXd y, std::optional<std::vector<int>> group_labels,
                 std::vector<std::string> predictor_names, std::string response_name)
    : x_(std::move(x)),
      y_(std::move(y)),
      predictor_names_(std::move(predictor_names)),
      response_name_(std::move(response_name)) {
  if (x_.rows() < 1) throw DataError("dataset needs at least one observation");
  if (y_.size() != x_.rows()) {
    throw DataError("response length " + std::to_string(y_.size()) + " does not match " +
                    std::to_string(x_.rows()) + " predictor rows");
  }
  if (!x_.allFinite() || !y_.allFinite()) throw DataError("dataset contains non-finite values");
  if (group_labels) {
    if (static_cast<Index>(group_labels->size()) != x_.cols()) {
      throw DataError("group index has length " + std::to_string(group_labels->size()) +
                      " but there are " + std::to_string(x_.cols()) + " predictors");
    }
    groups_ = GroupStructure::from_labels(*group_labels);
  }
  if (predictor_names_.empty()) {
    for (Index j = 0; j < x_.cols(); ++j) predictor_names_.push_back("x" + std::to_string(j));
  } else if (static_cast<Index>(predictor_names_.size()) != x_.cols()) {
    throw DataError("predictor name count does not match column count");
  }
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  MatrixXd xs(static_cast<Index>(rows.size()), x_.cols());
  VectorXd ys(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= x_.rows()) throw DataError("row index out of range in subset");
    xs.row(static_cast<Index>(i)) = x_.row(r);
    ys(static_cast<Index>(i)) = y_(r);
  }
  std::optional<std::vector<int>> labels;
  if (groups_) labels = groups_->dense_labels();
  return Dataset(std::move(xs), std::move(ys), std::move(labels), predictor_names_, response_name_);
}

SplitIndices train_test_split(Index nrows, std::optional<Index> train_size, double train_pct,
                              std::optional<std::uint64_t> seed) {
  if (nrows < 2) throw ConfigError("train_test_split needs at least two rows");
  Index n_train = 0;
  if (train_size) {
    n_train = *train_size;
    if (n_train <= 0 || n_train >= nrows) {
      throw ConfigError("train_size must satisfy 0 < train_size < nrows");
    }
  } else {
    if (!(train_pct > 0.0 && train_pct < 1.0)) throw ConfigError("train_pct must lie in (0, 1)");
    n_train = static_cast<Index>(std::llround(train_pct * static_cast<double>(nrows)));
    if (n_train <= 0 || n_train >= nrows) {
      throw ConfigError("train_pct leaves an empty train or test part");
    }
  }
  const IndexList order = permutation(nrows, seed ? *seed : entropy_seed());
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.test.assign(order.begin() + n_train, order.end());
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

using Records = std::vector<std::vector<std::string>>;

Records parse_csv(std::istream& in, const std::string& source) {
  Records records;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool quoted_field = false;
  char c = 0;

  auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    field_started = false;
    quoted_field = false;
  };
  auto end_record = [&] {
    end_field();
    // Skip blank lines.
    if (!(fields.size() == 1 && fields[0].empty())) records.push_back(std::move(fields));
    fields.clear();
  };

  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started && !quoted_field) {
          throw DataError(source + ": stray quote inside unquoted field in " +
                          record_label(records.size()));
        }
        in_quotes = true;
        quoted_field = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw DataError(source + ": unterminated quoted field");
  if (field_started || !fields.empty()) end_record();
  return records;
}

Records read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  return parse_csv(in, path.string());
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view text, T& value) {
  text = trim(text);
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc{} && ptr == end;
}

double parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t record,
                  const std::string& column) {
  double value = 0.0;
  if (!parse_number(cell, value) || !std::isfinite(value)) {
    throw DataError(path.string() + ": non-numeric cell \"" + cell + "\" at " +
                    record_label(record) + ", column \"" + column + "\"");
  }
  return value;
}

Index resolve_column(const std::vector<std::string>& header, const ColumnRef& ref,
                     const std::filesystem::path& path) {
  if (const auto* name = std::get_if<std::string>(&ref)) {
    const auto it = std::find(header.begin(), header.end(), *name);
    if (it == header.end()) {
      throw DataError(path.string() + ": response column \"" + *name + "\" not found");
    }
    return static_cast<Index>(it - header.begin());
  }
  const Index idx = std::get<Index>(ref);
  if (idx < 0 || idx >= static_cast<Index>(header.size())) {
    throw DataError(path.string() + ": response column index " + std::to_string(idx) +
                    " out of range");
  }
  return idx;
}

Dataset build_dataset(const Records& records, std::size_t first_data, Index response,
                      std::optional<std::vector<int>> labels, const std::filesystem::path& path) {
  const auto& header = records.front();
  const auto ncols = static_cast<Index>(header.size());
  if (ncols < 2) throw DataError(path.string() + ": need a response and at least one predictor");
  const auto nrows = static_cast<Index>(records.size() - first_data);
  if (nrows < 1) throw DataError(path.string() + ": no data rows");

  MatrixXd x(nrows, ncols - 1);
  VectorXd y(nrows);
  for (Index i = 0; i < nrows; ++i) {
    const auto rec = first_data + static_cast<std::size_t>(i);
    const auto& row = records[rec];
    if (static_cast<Index>(row.size()) != ncols) {
      throw DataError(path.string() + ": " + record_label(rec) + " has " +
                      std::to_string(row.size()) + " fields, expected " + std::to_string(ncols));
    }
    Index out_col = 0;
    for (Index c = 0; c < ncols; ++c) {
      const auto& column = header[static_cast<std::size_t>(c)];
      const double v = parse_cell(row[static_cast<std::size_t>(c)], path, rec, column);
      if (c == response) {
        y(i) = v;
      } else {
        x(i, out_col++) = v;
      }
    }
  }
  std::vector<std::string> names;
  for (Index c = 0; c < ncols; ++c) {
    if (c != response) names.push_back(header[static_cast<std::size_t>(c)]);
  }
  return Dataset(std::move(x), std::move(y), std::move(labels), std::move(names),
                 header[static_cast<std::size_t>(response)]);
}

std::vector<int> parse_labels(const std::vector<std::string>& fields,
                              const std::filesystem::path& path, std::size_t record,
                              std::optional<Index> skip) {
  std::vector<int> labels;
  for (std::size_t c = 0; c < fields.size(); ++c) {
    if (skip && static_cast<Index>(c) == *skip) continue;
    int label = 0;
    if (!parse_number(fields[c], label)) {
      throw DataError(path.string() + ": group label \"" + fields[c] + "\" at " +
                      record_label(record) + ", field " + std::to_string(c + 1) +
                      " is not an integer");
    }
    labels.push_back(label);
  }
  return labels;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const ColumnRef& response, bool group_row) {
  const Records records = read_records(path);
  if (records.empty()) throw DataError(path.string() + ": empty file");
  const Index resp = resolve_column(records.front(), response, path);
  std::optional<std::vector<int>> labels;
  std::size_t first_data = 1;
  if (group_row) {
    if (records.size() < 2) throw DataError(path.string() + ": missing group row");
    const auto& row = records[1];
    if (row.size() != records.front().size()) {
      throw DataError(path.string() + ": group row length does not match header");
    }
    labels = parse_labels(row, path, 1, resp);
    first_data = 2;
  }
  return build_dataset(records, first_data, resp, std::move(labels), path);
}

Dataset load_csv(const std::filesystem::path& path, const ColumnRef& response,
                 const std::filesystem::path& group_file) {
  const Records records = read_records(path);
  if (records.empty()) throw DataError(path.string() + ": empty file");
  const Index resp = resolve_column(records.front(), response, path);
  auto labels = load_group_file(group_file);
  if (static_cast<Index>(labels.size()) != static_cast<Index>(records.front().size()) - 1) {
    throw DataError(group_file.string() + ": group index has length " +
                    std::to_string(labels.size()) + " but there are " +
                    std::to_string(records.front().size() - 1) + " predictors");
  }
  return build_dataset(records, 1, resp, std::move(labels), path);
}

std::vector<int> load_group_file(const std::filesystem::path& path) {
  const Records records = read_records(path);
  if (records.size() != 1) {
    throw DataError(path.string() + ": group file must hold exactly one row of labels");
  }
  return parse_labels(records.front(), path, 0, std::nullopt);
}

Table load_table(const std::filesystem::path& path) {
  const Records records = read_records(path);
  if (records.empty()) throw DataError(path.string() + ": empty file");
  Table table;
  table.header = records.front();
  const auto ncols = static_cast<Index>(table.header.size());
  table.values.resize(static_cast<Index>(records.size()) - 1, ncols);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (static_cast<Index>(records[r].size()) != ncols) {
      throw DataError(path.string() + ": " + record_label(r) + " has wrong field count");
    }
    for (Index c = 0; c < ncols; ++c) {
      table.values(static_cast<Index>(r) - 1, c) =
          parse_cell(records[r][static_cast<std::size_t>(c)], path, r,
                     table.header[static_cast<std::size_t>(c)]);
    }
  }
  return table;
}

std::string format_real(double value) {
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value,
                                 std::chars_format::general, 17);
  if (ec != std::errc{}) throw std::runtime_error("format_real: conversion failed");
  return std::string(buffer, ptr);
}

namespace {

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path.string());
  return out;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const Dataset& data) {
  auto out = open_output(path);
  for (const auto& name : data.predictor_names()) out << quote_field(name) << ',';
  out << quote_field(data.response_name()) << '\n';
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) out << format_real(data.x()(i, j)) << ',';
    out << format_real(data.y()(i)) << '\n';
  }
}

void write_group_file(const std::filesystem::path& path, const GroupStructure& groups) {
  auto out = open_output(path);
  const auto labels = groups.dense_labels();
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j) out << ',';
    out << labels[j];
  }
  out << '\n';
}

void write_table(const std::filesystem::path& path, const Table& table) {
  auto out = open_output(path);
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out << ',';
    out << quote_field(table.header[c]);
  }
  out << '\n';
  for (Index i = 0; i < table.values.rows(); ++i) {
    for (Index j = 0; j < table.values.cols(); ++j) {
      if (j) out << ',';
      out << format_real(table.values(i, j));
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------

Standardizer Standardizer::fit(const MatrixXd& x) {
  Standardizer s;
  s.mean = x.colwise().mean();
  const MatrixXd centered = x.rowwise() - s.mean;
  const double denom = std::max<double>(1.0, static_cast<double>(x.rows()));
  s.scale = (centered.array().square().colwise().sum() / denom).sqrt();
  for (Index j = 0; j < s.scale.size(); ++j) {
    if (!(s.scale(j) > 1e-12)) s.scale(j) = 1.0;
  }
  return s;
}

MatrixXd Standardizer::apply(const MatrixXd& x) const {
  if (x.cols() != mean.size()) throw DataError("standardizer column count mismatch");
  return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

Dataset Standardizer::apply(const Dataset& data) const {
  std::optional<std::vector<int>> labels;
  if (data.groups()) labels = data.groups()->dense_labels();
  return Dataset(apply(data.x()), data.y(), std::move(labels), data.predictor_names(),
                 data.response_name());
}

// ---------------------------------------------------------------------------

namespace {

double signed_magnitude(Rng& rng) {
  const double magnitude = rng.uniform(5.0, 10.0);
  return rng.uniform() < 0.5 ? -magnitude : magnitude;
}

MatrixXd standard_normal(Rng& rng, Index rows, Index cols) {
  MatrixXd x(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) x(i, j) = rng.normal();
  }
  return x;
}

}  // namespace

std::pair<Dataset, SyntheticTruth> generate_grouped(const GroupedDesign& d) {
  if (d.n_obs < 1 || d.group_size < 1 || d.num_groups < 1) {
    throw ConfigError("generate_grouped: n_obs, group_size and num_groups must be positive");
  }
  if (d.non_zero_groups < 0 || d.non_zero_groups > d.num_groups) {
    throw ConfigError("generate_grouped: non_zero_groups must lie in [0, num_groups]");
  }
  if (d.non_zero_coef < 0 || d.non_zero_coef > d.group_size) {
    throw ConfigError("generate_grouped: non_zero_coef must lie in [0, group_size]");
  }
  if (!(d.noise >= 0.0)) throw ConfigError("generate_grouped: noise must be nonnegative");

  Rng rng(d.seed);
  const Index p = d.group_size * d.num_groups;
  MatrixXd x = standard_normal(rng, d.n_obs, p);
  VectorXd beta = VectorXd::Zero(p);
  for (Index g = 0; g < d.non_zero_groups; ++g) {
    for (Index k = 0; k < d.non_zero_coef; ++k) beta(g * d.group_size + k) = signed_magnitude(rng);
  }
  VectorXd y = x * beta;
  for (Index i = 0; i < d.n_obs; ++i) y(i) += d.noise * rng.normal();

  std::vector<int> labels(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) labels[static_cast<std::size_t>(j)] = static_cast<int>(j / d.group_size);
  Dataset data(std::move(x), std::move(y), std::move(labels));
  return {std::move(data), SyntheticTruth{std::move(beta), 0.0, d}};
}

std::pair<Dataset, SyntheticTruth> generate_sparse(const SparseDesign& d) {
  if (d.n_samples < 1 || d.n_features < 1) {
    throw ConfigError("generate_sparse: n_samples and n_features must be positive");
  }
  if (d.n_informative < 0 || d.n_informative > d.n_features) {
    throw ConfigError("generate_sparse: n_informative must lie in [0, n_features]");
  }
  if (!(d.noise >= 0.0)) throw ConfigError("generate_sparse: noise must be nonnegative");

  Rng rng(d.seed);
  MatrixXd x = standard_normal(rng, d.n_samples, d.n_features);
  const IndexList order = permutation(d.n_features, rng.next());
  VectorXd beta = VectorXd::Zero(d.n_features);
  for (Index k = 0; k < d.n_informative; ++k) {
    beta(order[static_cast<std::size_t>(k)]) = signed_magnitude(rng);
  }
  VectorXd y = (x * beta).array() + d.bias;
  for (Index i = 0; i < d.n_samples; ++i) y(i) += d.noise * rng.normal();

  Dataset data(std::move(x), std::move(y));
  return {std::move(data), SyntheticTruth{std::move(beta), d.bias, d}};
}

}  // namespace penreg
