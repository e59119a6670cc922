#include "frr/fuzzify.hpp"

#include <algorithm>
#include <cmath>

#include "frr/error.hpp"

namespace frr {

double membership(const TrapezoidMF& mf, double x) {
  if (x >= mf.b && x <= mf.c) return 1.0;
  if (x < mf.b) {
    if (mf.left_shoulder || x <= mf.a) return mf.left_shoulder ? 1.0 : 0.0;
    return (x - mf.a) / (mf.b - mf.a);
  }
  if (mf.right_shoulder) return 1.0;
  if (x >= mf.d) return 0.0;
  return (mf.d - x) / (mf.d - mf.c);
}

int FeaturePartition::term_index(const std::string& term) const {
  for (std::size_t t = 0; t < n_terms(); ++t)
    if (term_name(t) == term) return static_cast<int>(t);
  return -1;
}

PartitionSet::PartitionSet(std::vector<FeaturePartition> features) : features_(std::move(features)) {
  for (const auto& f : features_) {
    offsets_.push_back(width_);
    terms_.push_back(f.n_terms());
    width_ += f.n_terms();
  }
}

int PartitionSet::feature_index(const std::string& name) const {
  for (std::size_t j = 0; j < features_.size(); ++j)
    if (features_[j].name == name) return static_cast<int>(j);
  return -1;
}

std::vector<std::string> label_names(std::size_t n_labels) {
  switch (n_labels) {
    case 2: return {"low", "high"};
    case 3: return {"low", "medium", "high"};
    case 5: return {"very low", "low", "medium", "high", "very high"};
    default: {
      std::vector<std::string> names;
      for (std::size_t v = 0; v < n_labels; ++v) names.push_back("L" + std::to_string(v));
      return names;
    }
  }
}

LinguisticVariable build_linguistic_variable(std::size_t feature, std::span<const double> column,
                                             std::size_t n_labels) {
  if (n_labels < 2) throw std::invalid_argument("a linguistic variable needs at least 2 labels");
  const auto names = label_names(n_labels);
  LinguisticVariable var{feature, {}};
  if (n_labels == 3) {
    const double q0 = percentile(column, 0), q1 = percentile(column, 20), q2 = percentile(column, 40),
                 q3 = percentile(column, 60), q4 = percentile(column, 100);
    var.labels.push_back({names[0], {q0, q0, q1, q2, true, false}});
    var.labels.push_back({names[1], {q1, (q1 + q2) / 2, (q2 + q3) / 2, q3, false, false}});
    var.labels.push_back({names[2], {q2, q3, q4, q4, false, true}});
    return var;
  }
  std::vector<double> centres;
  for (std::size_t v = 0; v < n_labels; ++v)
    centres.push_back(percentile(column, 100.0 * static_cast<double>(v) / static_cast<double>(n_labels - 1)));
  for (std::size_t v = 0; v < n_labels; ++v) {
    const double left = v == 0 ? centres[0] : centres[v - 1];
    const double right = v + 1 == n_labels ? centres[v] : centres[v + 1];
    var.labels.push_back({names[v], {left, centres[v], centres[v], right, v == 0, v + 1 == n_labels}});
  }
  return var;
}

PartitionSet build_partitions(const TabularDataset& train, std::size_t n_labels) {
  if (train.n_rows() == 0) throw DataError("cannot build partitions from an empty dataset");
  std::vector<FeaturePartition> features;
  std::vector<double> column(train.n_rows());
  for (std::size_t j = 0; j < train.n_features(); ++j) {
    const auto& spec = train.specs[j];
    FeaturePartition part;
    part.name = spec.name;
    part.kind = spec.kind;
    if (spec.is_categorical()) {
      part.categories = spec.categories;
    } else {
      for (std::size_t i = 0; i < train.n_rows(); ++i) column[i] = train.row(i)[j];
      part.variable = build_linguistic_variable(j, column, n_labels);
    }
    features.push_back(std::move(part));
  }
  return PartitionSet(std::move(features));
}

std::vector<double> fuzzify_row(const PartitionSet& partitions, std::span<const double> row,
                                std::vector<std::string>* warnings) {
  if (row.size() != partitions.n_features())
    throw ShapeError("row has " + std::to_string(row.size()) + " values, partitions expect " +
                     std::to_string(partitions.n_features()));
  std::vector<double> out(partitions.width(), 0.0);
  for (std::size_t j = 0; j < row.size(); ++j) {
    const auto& f = partitions.feature(j);
    double* block = out.data() + partitions.offset(j);
    if (f.kind == FeatureKind::categorical) {
      const double idx = row[j];
      if (idx >= 0 && idx < static_cast<double>(f.categories.size()) && idx == std::floor(idx)) {
        block[static_cast<std::size_t>(idx)] = 1.0;
      } else if (warnings) {
        warnings->push_back("unknown category for feature '" + f.name + "'");
      }
    } else {
      for (std::size_t v = 0; v < f.variable.labels.size(); ++v) block[v] = membership(f.variable.labels[v].mf, row[j]);
    }
  }
  return out;
}

std::vector<double> fuzzify_dataset(const PartitionSet& partitions, const TabularDataset& dataset) {
  std::vector<double> out;
  out.reserve(dataset.n_rows() * partitions.width());
  for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
    const auto u1 = fuzzify_row(partitions, dataset.row(i));
    out.insert(out.end(), u1.begin(), u1.end());
  }
  return out;
}

std::vector<double> encode_row(const PartitionSet& partitions, std::span<const std::string> cells) {
  if (cells.size() != partitions.n_features())
    throw DataError("row has " + std::to_string(cells.size()) + " cells, expected " +
                    std::to_string(partitions.n_features()));
  std::vector<double> row(cells.size());
  for (std::size_t j = 0; j < cells.size(); ++j) {
    const auto& f = partitions.feature(j);
    if (f.kind == FeatureKind::categorical) {
      const auto it = std::find(f.categories.begin(), f.categories.end(), cells[j]);
      row[j] = it == f.categories.end() ? -1.0 : static_cast<double>(it - f.categories.begin());
    } else if (!parse_real(cells[j], row[j])) {
      throw DataError("cannot parse '" + cells[j] + "' for continuous feature '" + f.name + "'");
    }
  }
  return row;
}

}  // namespace frr
