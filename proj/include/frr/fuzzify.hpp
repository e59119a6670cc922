#pragma once

// Linguistic partitions. Continuous features get quantile-placed trapezoids
// ("low"/"medium"/"high" by default); categorical features are one-hot.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "frr/data.hpp"

namespace frr {

struct TrapezoidMF {
  double a = 0, b = 0, c = 0, d = 0;
  bool left_shoulder = false;
  bool right_shoulder = false;
};

/// Degree of `x` in `mf`. Zero-width ramps are steps reaching 1 on the
/// plateau side; shoulders extend the plateau to -inf / +inf.
double membership(const TrapezoidMF& mf, double x);

struct LinguisticLabel {
  std::string name;
  TrapezoidMF mf;
};

struct LinguisticVariable {
  std::size_t feature = 0;
  std::vector<LinguisticLabel> labels;
};

/// One entry per dataset feature. Continuous entries carry labels, categorical
/// entries carry the category vocabulary.
struct FeaturePartition {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  LinguisticVariable variable;          // continuous
  std::vector<std::string> categories;  // categorical

  std::size_t n_terms() const { return kind == FeatureKind::categorical ? categories.size() : variable.labels.size(); }
  const std::string& term_name(std::size_t t) const {
    return kind == FeatureKind::categorical ? categories.at(t) : variable.labels.at(t).name;
  }
  /// Index of a term by name, or -1.
  int term_index(const std::string& term) const;
};

class PartitionSet {
 public:
  PartitionSet() = default;
  explicit PartitionSet(std::vector<FeaturePartition> features);

  std::size_t n_features() const { return features_.size(); }
  const FeaturePartition& feature(std::size_t j) const { return features_.at(j); }
  const std::vector<FeaturePartition>& features() const { return features_; }

  /// Term count per feature; the model's W2 rows have these lengths.
  const std::vector<std::size_t>& terms_per_feature() const { return terms_; }
  /// Start of feature j's block inside a fuzzified row.
  std::size_t offset(std::size_t j) const { return offsets_.at(j); }
  std::size_t width() const { return width_; }

  int feature_index(const std::string& name) const;

 private:
  std::vector<FeaturePartition> features_;
  std::vector<std::size_t> terms_;
  std::vector<std::size_t> offsets_;
  std::size_t width_ = 0;
};

/// Default label names for V labels: low/medium/high when V = 3.
std::vector<std::string> label_names(std::size_t n_labels);

/// Quantile trapezoids for one column. For V = 3 with Q0..Q4 at the
/// 0/20/40/60/100th percentiles: low = (Q0,Q0,Q1,Q2), medium =
/// (Q1,(Q1+Q2)/2,(Q2+Q3)/2,Q3), high = (Q2,Q3,Q4,Q4). Other V use
/// evenly spaced percentile centres with neighbouring feet.
LinguisticVariable build_linguistic_variable(std::size_t feature, std::span<const double> column,
                                             std::size_t n_labels = 3);

/// Partitions from the rows of `train` only.
PartitionSet build_partitions(const TabularDataset& train, std::size_t n_labels = 3);

/// Layer-1 degrees for one encoded row. Categorical cells hold the category
/// index; a negative index (unknown category) yields an all-zero block and
/// appends a message to `warnings` when given.
std::vector<double> fuzzify_row(const PartitionSet& partitions, std::span<const double> row,
                                std::vector<std::string>* warnings = nullptr);

/// Fuzzifies every row of `dataset`, row-major N x width.
std::vector<double> fuzzify_dataset(const PartitionSet& partitions, const TabularDataset& dataset);

/// Encodes raw string cells (feature order) into fuzzify_row input. Unknown
/// categories become -1; unparseable numbers throw DataError.
std::vector<double> encode_row(const PartitionSet& partitions, std::span<const std::string> cells);

}  // namespace frr
