#include "frr/classifier.hpp"

#include <stdexcept>

#include "frr/error.hpp"
#include "frr/kernels.hpp"

namespace frr {

TrainedModel train_model(const TabularDataset& train, const FrrConfig& config) {
  train.validate();
  if (train.n_rows() == 0) throw DataError("training set is empty");
  if (train.n_classes() < 2) throw DataError("training needs at least 2 classes");
  TrainedModel out;
  FrrModel& model = out.model;
  model.partitions = build_partitions(train, config.labels);
  model.class_names = train.class_names;
  model.target_name = train.target_name;
  const ModelShape shape{model.partitions.terms_per_feature(), train.n_classes()};
  const auto u1 = fuzzify_dataset(model.partitions, train);
  FitResult fitted = fit(u1, train.targets, shape, config);
  model.config = config;
  model.config.default_class = fitted.default_class;
  model.weights = std::move(fitted.weights);
  out.history = std::move(fitted.history);
  return out;
}

std::vector<int> predict_dataset(const FrrModel& model, const TabularDataset& dataset) {
  if (dataset.n_features() != model.partitions.n_features())
    throw ShapeError("dataset has " + std::to_string(dataset.n_features()) + " features, model expects " +
                     std::to_string(model.partitions.n_features()));
  if (dataset.n_rows() == 0) return {};
  const auto u1 = fuzzify_dataset(model.partitions, dataset);
  const auto nw = normalize_weights(model.weights, model.config, std::nullopt);
  return predict_rows(u1, model.partitions.width(), nw, model.config);
}

RuleBase extract(const FrrModel& model) {
  return extract(model.weights, model.partitions, model.config, model.class_names);
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("prediction and label counts differ");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace frr
