#pragma once

// Symbolic rule base read off a trained network, and a standalone evaluator
// that reproduces inference-mode predictions exactly.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "frr/fuzzify.hpp"
#include "frr/model.hpp"

namespace frr {

struct Condition {
  std::size_t feature = 0;
  std::string feature_name;
  std::size_t term = 0;
  std::string term_name;
  double label_weight = 0;  // selected W2 entry
  double slot_weight = 0;   // selected W3 entry
  double keep_weight = 0;   // keep entry of the slot's silencer pair
};

struct Rule {
  std::vector<Condition> conditions;  // empty: unconditional rule
  int consequent = 0;
  double decision_weight = 0;
  std::size_t origin = 0;  // rule index inside the network

  /// decision_weight times every condition weight.
  double constant_factor() const;
};

struct RuleBase {
  std::vector<Rule> rules;  // network order
  PartitionSet partitions;
  std::vector<std::string> class_names;
  TNormSpec tnorm;
  bool weights_in_tnorm = false;
  int default_class = 0;
  std::size_t raw_rule_count = 0;  // before duplicate merging
  std::size_t max_rules = 0;       // R
  std::size_t max_conditions = 0;  // A
};

/// One rule per network rule, silenced slots removed, exact duplicates merged.
RuleBase extract(const FrrWeights& weights, const PartitionSet& partitions, const FrrConfig& config,
                 const std::vector<std::string>& class_names);

struct RuleEvaluation {
  int prediction = 0;
  int winning_rule = -1;  // index into RuleBase::rules; -1 on fallback
  double truth = 0;       // score of the predicted class
  std::vector<double> scores;
};

/// Rule truth for one fuzzified row.
double rule_truth(const RuleBase& rb, const Rule& rule, std::span<const double> u1);

/// Evaluates a fuzzified row.
RuleEvaluation evaluate_fuzzified(const RuleBase& rb, std::span<const double> u1);

/// Evaluates an encoded row (feature order; categorical cells as indices).
RuleEvaluation evaluate_rulebase(const RuleBase& rb, std::span<const double> row);

struct ComplexityReport {
  std::size_t n_rules = 0;
  double avg_conditions_per_rule = 0;
  std::size_t rule_base_size = 0;
  std::size_t unique_conditions = 0;
  std::size_t max_conditions = 0;
};

ComplexityReport complexity(const RuleBase& rb);

/// One block per class, rules by descending decision weight:
///
///   Rules for class tested_positive
///     IF Glucose IS high  (weight 0.8731)
std::string render_text(const RuleBase& rb);

/// A rule as recovered from text: (feature, term) pairs plus consequent.
struct ParsedRule {
  std::vector<std::pair<std::size_t, std::size_t>> conditions;
  int consequent = 0;

  bool operator==(const ParsedRule&) const = default;
};

/// Parses render_text() output back into condition sets. Throws DataError
/// on unknown features, terms or classes.
std::vector<ParsedRule> parse_text(const std::string& text, const PartitionSet& partitions,
                                   const std::vector<std::string>& class_names);

/// Condition sets of a rule base in render order, for comparison with parse_text().
std::vector<ParsedRule> rule_signatures(const RuleBase& rb);

/// Removes rules that win no prediction on `rows` (encoded rows, row-major).
RuleBase prune_dead(const RuleBase& rb, std::span<const double> rows, std::size_t n_features);

}  // namespace frr
