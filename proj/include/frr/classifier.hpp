#pragma once

// A trained model bundled with the partitions and class names it needs to
// run on raw rows.

#include <span>
#include <string>
#include <vector>

#include "frr/data.hpp"
#include "frr/fuzzify.hpp"
#include "frr/grad.hpp"
#include "frr/model.hpp"
#include "frr/rules.hpp"

namespace frr {

struct FrrModel {
  FrrConfig config;  // default_class holds the training majority class
  PartitionSet partitions;
  FrrWeights weights;
  std::vector<std::string> class_names;
  std::string target_name;
};

struct TrainedModel {
  FrrModel model;
  TrainingHistory history;
};

/// Builds partitions on `train`, fuzzifies it and fits the network.
TrainedModel train_model(const TabularDataset& train, const FrrConfig& config);

/// Inference-mode predictions for every row of `dataset`, which must share
/// the model's feature layout.
std::vector<int> predict_dataset(const FrrModel& model, const TabularDataset& dataset);

RuleBase extract(const FrrModel& model);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace frr
