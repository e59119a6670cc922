#pragma once

// Tabular ingestion: CSV loading, schema inference, percentiles and
// stratified fold assignment.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace frr {

enum class FeatureKind { continuous, categorical };

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  std::vector<std::string> categories;  // categorical only

  bool is_categorical() const { return kind == FeatureKind::categorical; }
  /// Index of `token` in `categories`, or -1.
  int category_index(const std::string& token) const;
};

/// N rows by M features plus a class index per row. Continuous cells hold the
/// real value; categorical cells hold the category index as a double.
struct TabularDataset {
  std::vector<FeatureSpec> specs;
  std::vector<double> values;  // row-major, N * M
  std::vector<int> targets;
  std::vector<std::string> class_names;  // first-appearance order
  std::string target_name;

  std::size_t n_rows() const { return targets.size(); }
  std::size_t n_features() const { return specs.size(); }
  std::size_t n_classes() const { return class_names.size(); }

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * specs.size(), specs.size()};
  }

  /// Rows in `indices` order, sharing specs and class names.
  TabularDataset subset(std::span<const std::size_t> indices) const;

  /// Token for a cell: the category for categorical features, the %.17g
  /// rendering otherwise.
  std::string cell_text(std::size_t i, std::size_t j) const;

  std::vector<std::size_t> class_counts() const;
  int majority_class() const;

  /// Throws DataError when any TabularDataset invariant is violated.
  void validate() const;
};

/// Column name -> spec, as read from a schema sidecar.
using Schema = std::map<std::string, FeatureSpec>;

/// Header plus raw string cells, no typing. Rows keep their own arity.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv_table(const std::filesystem::path& path);

/// Loads a dataset. Columns listed in `schema` take the declared kind;
/// all others go through infer_schema.
TabularDataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                        const std::optional<Schema>& schema = std::nullopt);

/// Writes `dataset` back as CSV (features in spec order, target last).
void write_csv(const TabularDataset& dataset, const std::filesystem::path& path);

/// Reads {"col": {"kind": "continuous"|"categorical", "categories": [...]}}.
Schema load_schema(const std::filesystem::path& path);

/// Categorical iff any value is non-numeric, or there are at most 10 distinct
/// values and all of them are integral.
FeatureSpec infer_schema(const std::string& name, std::span<const std::string> column);

bool parse_real(const std::string& text, double& out);

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // fold per row
  std::uint64_t seed = 0;

  std::vector<std::size_t> train_indices(std::size_t fold) const;
  std::vector<std::size_t> test_indices(std::size_t fold) const;
};

FoldPlan stratified_kfold(const TabularDataset& dataset, std::size_t k, std::uint64_t seed);

/// Linear-interpolation percentile at fractional rank q/100 * (n - 1).
double percentile(std::span<const double> values, double q);

}  // namespace frr
