#include "frr/rules.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "frr/error.hpp"

namespace frr {

double Rule::constant_factor() const {
  double f = decision_weight;
  for (const auto& c : conditions) f *= c.keep_weight * c.slot_weight * c.label_weight;
  return f;
}

namespace {

using Signature = std::vector<std::pair<std::size_t, std::size_t>>;

Signature signature_of(const Rule& rule) {
  Signature sig;
  for (const auto& c : rule.conditions) sig.emplace_back(c.feature, c.term);
  std::sort(sig.begin(), sig.end());
  return sig;
}

// Per-condition factors sorted within each (feature, term) group, largest first.
std::vector<double> sorted_factors(const Rule& rule) {
  std::vector<std::tuple<std::size_t, std::size_t, double>> items;
  for (const auto& c : rule.conditions)
    items.emplace_back(c.feature, c.term, -(c.keep_weight * c.slot_weight * c.label_weight));
  std::sort(items.begin(), items.end());
  std::vector<double> out;
  for (const auto& it : items) out.push_back(-std::get<2>(it));
  return out;
}

// True when `a` scores at least as high as `b` on every input.
bool dominates(const Rule& a, const Rule& b, const RuleBase& rb) {
  if (rb.tnorm.kind == TNormKind::product && !rb.weights_in_tnorm) return a.constant_factor() >= b.constant_factor();
  if (a.decision_weight < b.decision_weight) return false;
  if (rb.weights_in_tnorm && rb.tnorm.kind != TNormKind::product) {
    // T is monotone in each weight separately
    std::vector<std::tuple<std::size_t, std::size_t, double, double, double>> x, y;
    for (const auto& c : a.conditions) x.emplace_back(c.feature, c.term, c.keep_weight, c.slot_weight, c.label_weight);
    for (const auto& c : b.conditions) y.emplace_back(c.feature, c.term, c.keep_weight, c.slot_weight, c.label_weight);
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::get<2>(x[i]) < std::get<2>(y[i]) || std::get<3>(x[i]) < std::get<3>(y[i]) ||
          std::get<4>(x[i]) < std::get<4>(y[i]))
        return false;
    return true;
  }
  const auto fa = sorted_factors(a);
  const auto fb = sorted_factors(b);
  for (std::size_t i = 0; i < fa.size(); ++i)
    if (fa[i] < fb[i]) return false;
  return true;
}

}  // namespace

RuleBase extract(const FrrWeights& weights, const PartitionSet& partitions, const FrrConfig& config,
                 const std::vector<std::string>& class_names) {
  const ParameterLayout& layout = weights.layout;
  const ModelShape& shape = layout.shape();
  if (weights.values.size() != layout.size() || layout.size() == 0) throw ShapeError("weights are not initialised");
  if (shape.terms != partitions.terms_per_feature()) throw ShapeError("weights do not match the partitions");
  if (class_names.size() != shape.classes) throw ShapeError("class list does not match the decision layer");

  const auto nw = normalize_weights(weights, config, std::nullopt);
  RuleBase rb;
  rb.partitions = partitions;
  rb.class_names = class_names;
  rb.tnorm = config.tnorm;
  rb.weights_in_tnorm = config.weights_in_tnorm && config.tnorm.kind != TNormKind::product;
  rb.default_class = config.default_class;
  rb.max_rules = layout.rules();
  rb.max_conditions = layout.conditions();

  auto argmax_in = [&](std::size_t offset, std::size_t length) {
    return argmax_index(std::span<const double>(nw.norm.data() + offset, length));
  };

  std::vector<Rule> raw;
  for (std::size_t r = 0; r < layout.rules(); ++r) {
    Rule rule;
    rule.origin = r;
    rule.consequent = static_cast<int>(nw.consequent[r]);
    rule.decision_weight = nw.norm[layout.decision_row(r) + nw.consequent[r]];
    for (std::size_t k = 0; k < layout.conditions(); ++k) {
      if (!nw.keep[r * layout.conditions() + k]) continue;
      Condition c;
      const std::size_t slot_off = layout.slot_row(r, k);
      c.feature = argmax_in(slot_off, shape.features());
      const std::size_t label_off = layout.label_row(r, c.feature);
      c.term = argmax_in(label_off, shape.terms[c.feature]);
      const auto& fp = partitions.feature(c.feature);
      c.feature_name = fp.name;
      c.term_name = fp.term_name(c.term);
      c.label_weight = nw.norm[label_off + c.term];
      c.slot_weight = nw.norm[slot_off + c.feature];
      c.keep_weight = nw.norm[layout.silencer(r, k)];
      rule.conditions.push_back(std::move(c));
    }
    raw.push_back(std::move(rule));
  }
  rb.raw_rule_count = raw.size();

  // Merge duplicates only when one copy dominates the other, so the
  // per-class maximum is unchanged on every input.
  std::vector<bool> dropped(raw.size(), false);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (dropped[i]) continue;
    const Signature si = signature_of(raw[i]);
    for (std::size_t j = i + 1; j < raw.size(); ++j) {
      if (dropped[j] || raw[j].consequent != raw[i].consequent || signature_of(raw[j]) != si) continue;
      if (dominates(raw[i], raw[j], rb)) {
        dropped[j] = true;
      } else if (dominates(raw[j], raw[i], rb)) {
        dropped[i] = true;
        break;
      }
    }
  }
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (!dropped[i]) rb.rules.push_back(std::move(raw[i]));
  return rb;
}

double rule_truth(const RuleBase& rb, const Rule& rule, std::span<const double> u1) {
  std::vector<double> terms;
  terms.reserve(rule.conditions.size());
  for (const auto& c : rule.conditions) {
    const double mu = u1[rb.partitions.offset(c.feature) + c.term];
    // same operation order as the network's inference pass
    const double inner = rb.weights_in_tnorm
                             ? detail::tnorm2<double>(rb.tnorm, c.slot_weight, detail::tnorm2<double>(rb.tnorm, c.label_weight, mu))
                             : c.slot_weight * (c.label_weight * mu);
    terms.push_back(c.keep_weight * inner);
  }
  return detail::tnorm_unchecked<double>(rb.tnorm, terms);
}

RuleEvaluation evaluate_fuzzified(const RuleBase& rb, std::span<const double> u1) {
  if (u1.size() != rb.partitions.width()) throw ShapeError("fuzzified row width does not match the rule base");
  const std::size_t C = rb.class_names.size();
  RuleEvaluation out;
  out.scores.assign(C, 0.0);
  std::vector<int> winner(C, -1);
  std::vector<double> truth(C, 0.0);
  for (std::size_t i = 0; i < rb.rules.size(); ++i) {
    const Rule& rule = rb.rules[i];
    const auto c = static_cast<std::size_t>(rule.consequent);
    const double t = rule_truth(rb, rule, u1);
    const double h = rule.decision_weight * t;
    if (winner[c] < 0 || h > out.scores[c]) {
      out.scores[c] = h;
      winner[c] = static_cast<int>(i);
      truth[c] = t;
    }
  }
  FrrConfig fallback;
  fallback.default_class = rb.default_class;
  out.prediction = predict(out.scores, fallback);
  const auto p = static_cast<std::size_t>(out.prediction);
  if (out.scores[p] > 0) {
    out.winning_rule = winner[p];
    out.truth = out.scores[p];
  }
  return out;
}

RuleEvaluation evaluate_rulebase(const RuleBase& rb, std::span<const double> row) {
  if (row.size() != rb.partitions.n_features()) throw ShapeError("row arity does not match the rule base");
  const auto u1 = fuzzify_row(rb.partitions, row);
  return evaluate_fuzzified(rb, u1);
}

ComplexityReport complexity(const RuleBase& rb) {
  ComplexityReport out;
  out.n_rules = rb.rules.size();
  std::set<std::pair<std::size_t, std::size_t>> unique;
  for (const auto& rule : rb.rules) {
    out.rule_base_size += rule.conditions.size();
    out.max_conditions = std::max(out.max_conditions, rule.conditions.size());
    for (const auto& c : rule.conditions) unique.emplace(c.feature, c.term);
  }
  out.unique_conditions = unique.size();
  if (out.n_rules > 0) out.avg_conditions_per_rule = static_cast<double>(out.rule_base_size) / static_cast<double>(out.n_rules);
  return out;
}

namespace {

// Rule indices of class c by descending decision weight, network order on ties.
std::vector<std::size_t> render_order(const RuleBase& rb, int c) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < rb.rules.size(); ++i)
    if (rb.rules[i].consequent == c) idx.push_back(i);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return rb.rules[a].decision_weight > rb.rules[b].decision_weight; });
  return idx;
}

std::string antecedent(const Rule& rule) {
  if (rule.conditions.empty()) return "IF TRUE";
  std::string s = "IF ";
  for (std::size_t i = 0; i < rule.conditions.size(); ++i) {
    if (i) s += " AND ";
    s += rule.conditions[i].feature_name + " IS " + rule.conditions[i].term_name;
  }
  return s;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string render_text(const RuleBase& rb) {
  std::ostringstream out;
  if (rb.tnorm.kind != TNormKind::product)
    out << "# conjunction: " << to_string(rb.tnorm) << " (weights shown are approximate under this t-norm)\n";
  if (rb.rules.empty()) {
    out << "(no rules)\n";
  } else {
    for (std::size_t c = 0; c < rb.class_names.size(); ++c) {
      const auto idx = render_order(rb, static_cast<int>(c));
      if (idx.empty()) continue;
      out << "Rules for class " << rb.class_names[c] << "\n";
      for (std::size_t i : idx) {
        char weight[32];
        std::snprintf(weight, sizeof weight, "%.4f", rb.rules[i].decision_weight);
        out << "  " << antecedent(rb.rules[i]) << "  (weight " << weight << ")\n";
      }
    }
  }
  if (!rb.class_names.empty())
    out << "Otherwise: " << rb.class_names.at(static_cast<std::size_t>(rb.default_class)) << "\n";
  return out.str();
}

std::vector<ParsedRule> parse_text(const std::string& text, const PartitionSet& partitions,
                                   const std::vector<std::string>& class_names) {
  static const std::string kHeader = "Rules for class ";
  std::vector<ParsedRule> out;
  std::istringstream in(text);
  std::string line;
  int current = -1;
  while (std::getline(in, line)) {
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#' || body == "(no rules)" || body.rfind("Otherwise:", 0) == 0) continue;
    if (body.rfind(kHeader, 0) == 0) {
      const std::string name = body.substr(kHeader.size());
      const auto it = std::find(class_names.begin(), class_names.end(), name);
      if (it == class_names.end()) throw DataError("unknown class '" + name + "' in rule text");
      current = static_cast<int>(it - class_names.begin());
      continue;
    }
    if (body.rfind("IF ", 0) != 0) throw DataError("unrecognised rule line: " + body);
    if (current < 0) throw DataError("rule before any class header: " + body);
    std::string rest = body.substr(3);
    const auto wpos = rest.rfind("  (weight ");
    if (wpos != std::string::npos) rest = rest.substr(0, wpos);
    ParsedRule rule;
    rule.consequent = current;
    if (trim(rest) != "TRUE") {
      std::size_t start = 0;
      while (true) {
        const auto sep = rest.find(" AND ", start);
        const std::string cond = rest.substr(start, sep == std::string::npos ? std::string::npos : sep - start);
        const auto is = cond.find(" IS ");
        if (is == std::string::npos) throw DataError("condition without IS: " + cond);
        const int f = partitions.feature_index(cond.substr(0, is));
        if (f < 0) throw DataError("unknown feature '" + cond.substr(0, is) + "' in rule text");
        const int t = partitions.feature(static_cast<std::size_t>(f)).term_index(cond.substr(is + 4));
        if (t < 0) throw DataError("unknown term '" + cond.substr(is + 4) + "' in rule text");
        rule.conditions.emplace_back(static_cast<std::size_t>(f), static_cast<std::size_t>(t));
        if (sep == std::string::npos) break;
        start = sep + 5;
      }
    }
    out.push_back(std::move(rule));
  }
  return out;
}

std::vector<ParsedRule> rule_signatures(const RuleBase& rb) {
  std::vector<ParsedRule> out;
  for (std::size_t c = 0; c < rb.class_names.size(); ++c)
    for (std::size_t i : render_order(rb, static_cast<int>(c))) {
      ParsedRule p;
      p.consequent = rb.rules[i].consequent;
      for (const auto& cond : rb.rules[i].conditions) p.conditions.emplace_back(cond.feature, cond.term);
      out.push_back(std::move(p));
    }
  return out;
}

RuleBase prune_dead(const RuleBase& rb, std::span<const double> rows, std::size_t n_features) {
  if (n_features != rb.partitions.n_features() || (n_features > 0 && rows.size() % n_features != 0))
    throw ShapeError("rows do not match the rule base arity");
  std::vector<bool> used(rb.rules.size(), false);
  const std::size_t n = n_features == 0 ? 0 : rows.size() / n_features;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ev = evaluate_rulebase(rb, rows.subspan(i * n_features, n_features));
    if (ev.winning_rule >= 0) used[static_cast<std::size_t>(ev.winning_rule)] = true;
  }
  RuleBase out = rb;
  out.rules.clear();
  for (std::size_t i = 0; i < rb.rules.size(); ++i)
    if (used[i]) out.rules.push_back(rb.rules[i]);
  return out;
}

}  // namespace frr
