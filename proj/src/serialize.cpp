#include "frr/serialize.hpp"

#include <fstream>

#include "frr/error.hpp"

namespace frr {

using nlohmann::json;

namespace {

void check_header(const json& doc, const std::string& kind) {
  if (!doc.is_object()) throw DataError("document is not a JSON object");
  if (!doc.contains("format_version") || doc.at("format_version").get<int>() != kFormatVersion)
    throw DataError("unsupported format_version");
  if (doc.value("kind", "") != kind) throw DataError("expected a '" + kind + "' document");
}

json tnorm_to_json(const TNormSpec& spec) {
  json j = {{"kind", spec.kind == TNormKind::product   ? "product"
                     : spec.kind == TNormKind::minimum ? "minimum"
                                                       : "aczel-alsina"}};
  j["lambda"] = spec.lambda;
  return j;
}

TNormSpec tnorm_from_json(const json& j) {
  TNormSpec spec{parse_tnorm_kind(j.at("kind").get<std::string>()), j.value("lambda", 1.0)};
  spec.validate();
  return spec;
}

template <class F>
auto guarded(F&& body) {
  try {
    return body();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed document: ") + e.what());
  }
}

}  // namespace

json config_to_json(const FrrConfig& c) {
  return {{"rules", c.rules},
          {"conditions", c.conditions},
          {"labels", c.labels},
          {"temperature", c.temperature},
          {"tnorm", tnorm_to_json(c.tnorm)},
          {"weights_in_tnorm", c.weights_in_tnorm},
          {"use_root_norm", c.use_root_norm},
          {"beta_max", c.beta_max},
          {"beta_min", c.beta_min},
          {"gamma_max", c.gamma_max},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"cancel_penalty", c.cancel_penalty},
          {"keep_bias", c.keep_bias},
          {"ste", to_string(c.ste)},
          {"seed", c.seed},
          {"default_class", c.default_class}};
}

FrrConfig config_from_json(const json& j) {
  return guarded([&] {
    FrrConfig c;
    c.rules = j.at("rules").get<std::size_t>();
    c.conditions = j.at("conditions").get<std::size_t>();
    c.labels = j.at("labels").get<std::size_t>();
    c.temperature = j.at("temperature").get<double>();
    c.tnorm = tnorm_from_json(j.at("tnorm"));
    c.weights_in_tnorm = j.at("weights_in_tnorm").get<bool>();
    c.use_root_norm = j.at("use_root_norm").get<bool>();
    c.beta_max = j.at("beta_max").get<double>();
    c.beta_min = j.at("beta_min").get<double>();
    c.gamma_max = j.at("gamma_max").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.cancel_penalty = j.at("cancel_penalty").get<double>();
    c.keep_bias = j.value("keep_bias", 0.0);
    c.ste = parse_ste_mode(j.at("ste").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.default_class = j.at("default_class").get<int>();
    c.validate();
    return c;
  });
}

json partitions_to_json(const PartitionSet& partitions) {
  json out = json::array();
  for (const auto& f : partitions.features()) {
    json j = {{"name", f.name}};
    if (f.kind == FeatureKind::categorical) {
      j["kind"] = "categorical";
      j["categories"] = f.categories;
    } else {
      j["kind"] = "continuous";
      json labels = json::array();
      for (const auto& l : f.variable.labels)
        labels.push_back({{"name", l.name},
                          {"a", l.mf.a},
                          {"b", l.mf.b},
                          {"c", l.mf.c},
                          {"d", l.mf.d},
                          {"left_shoulder", l.mf.left_shoulder},
                          {"right_shoulder", l.mf.right_shoulder}});
      j["labels"] = std::move(labels);
    }
    out.push_back(std::move(j));
  }
  return out;
}

PartitionSet partitions_from_json(const json& doc) {
  return guarded([&] {
    std::vector<FeaturePartition> features;
    for (std::size_t idx = 0; idx < doc.size(); ++idx) {
      const json& j = doc.at(idx);
      FeaturePartition f;
      f.name = j.at("name").get<std::string>();
      const std::string kind = j.at("kind").get<std::string>();
      if (kind == "categorical") {
        f.kind = FeatureKind::categorical;
        f.categories = j.at("categories").get<std::vector<std::string>>();
        if (f.categories.empty()) throw DataError("categorical feature '" + f.name + "' has no categories");
      } else if (kind == "continuous") {
        f.variable.feature = idx;
        for (const json& l : j.at("labels")) {
          LinguisticLabel label;
          label.name = l.at("name").get<std::string>();
          label.mf = {l.at("a").get<double>(), l.at("b").get<double>(), l.at("c").get<double>(),
                      l.at("d").get<double>(), l.at("left_shoulder").get<bool>(), l.at("right_shoulder").get<bool>()};
          f.variable.labels.push_back(std::move(label));
        }
        if (f.variable.labels.empty()) throw DataError("continuous feature '" + f.name + "' has no labels");
      } else {
        throw DataError("unknown feature kind '" + kind + "'");
      }
      features.push_back(std::move(f));
    }
    return PartitionSet(std::move(features));
  });
}

json model_to_json(const FrrModel& model) {
  const ModelShape& shape = model.weights.layout.shape();
  return {{"format_version", kFormatVersion},
          {"kind", "model"},
          {"config", config_to_json(model.config)},
          {"target", model.target_name},
          {"classes", model.class_names},
          {"partitions", partitions_to_json(model.partitions)},
          {"shape", {{"terms", shape.terms}, {"classes", shape.classes}}},
          {"weights", model.weights.values}};
}

FrrModel model_from_json(const json& doc) {
  check_header(doc, "model");
  return guarded([&] {
    FrrModel m;
    m.config = config_from_json(doc.at("config"));
    m.target_name = doc.at("target").get<std::string>();
    m.class_names = doc.at("classes").get<std::vector<std::string>>();
    m.partitions = partitions_from_json(doc.at("partitions"));
    ModelShape shape{doc.at("shape").at("terms").get<std::vector<std::size_t>>(),
                     doc.at("shape").at("classes").get<std::size_t>()};
    if (shape.terms != m.partitions.terms_per_feature() || shape.classes != m.class_names.size())
      throw DataError("model shape disagrees with its partitions or classes");
    if (static_cast<std::size_t>(m.config.default_class) >= shape.classes)
      throw DataError("default class out of range");
    m.weights = FrrWeights(ParameterLayout(shape, m.config.rules, m.config.conditions));
    const auto values = doc.at("weights").get<std::vector<double>>();
    if (values.size() != m.weights.values.size()) throw DataError("weight count does not match the model shape");
    m.weights.values = values;
    return m;
  });
}

json rules_to_json(const RuleBase& rb) {
  json rules = json::array();
  for (const auto& r : rb.rules) {
    json conds = json::array();
    for (const auto& c : r.conditions)
      conds.push_back({{"feature", c.feature},
                       {"feature_name", c.feature_name},
                       {"term", c.term},
                       {"term_name", c.term_name},
                       {"label_weight", c.label_weight},
                       {"slot_weight", c.slot_weight},
                       {"keep_weight", c.keep_weight}});
    rules.push_back({{"origin", r.origin},
                     {"consequent", r.consequent},
                     {"decision_weight", r.decision_weight},
                     {"conditions", std::move(conds)}});
  }
  return {{"format_version", kFormatVersion},
          {"kind", "rules"},
          {"tnorm", tnorm_to_json(rb.tnorm)},
          {"weights_in_tnorm", rb.weights_in_tnorm},
          {"default_class", rb.default_class},
          {"classes", rb.class_names},
          {"partitions", partitions_to_json(rb.partitions)},
          {"raw_rule_count", rb.raw_rule_count},
          {"max_rules", rb.max_rules},
          {"max_conditions", rb.max_conditions},
          {"rules", std::move(rules)}};
}

RuleBase rules_from_json(const json& doc) {
  check_header(doc, "rules");
  return guarded([&] {
    RuleBase rb;
    rb.tnorm = tnorm_from_json(doc.at("tnorm"));
    rb.weights_in_tnorm = doc.at("weights_in_tnorm").get<bool>();
    rb.default_class = doc.at("default_class").get<int>();
    rb.class_names = doc.at("classes").get<std::vector<std::string>>();
    rb.partitions = partitions_from_json(doc.at("partitions"));
    rb.raw_rule_count = doc.at("raw_rule_count").get<std::size_t>();
    rb.max_rules = doc.at("max_rules").get<std::size_t>();
    rb.max_conditions = doc.at("max_conditions").get<std::size_t>();
    if (rb.default_class < 0 || static_cast<std::size_t>(rb.default_class) >= rb.class_names.size())
      throw DataError("default class out of range");
    for (const json& jr : doc.at("rules")) {
      Rule r;
      r.origin = jr.at("origin").get<std::size_t>();
      r.consequent = jr.at("consequent").get<int>();
      r.decision_weight = jr.at("decision_weight").get<double>();
      if (r.consequent < 0 || static_cast<std::size_t>(r.consequent) >= rb.class_names.size())
        throw DataError("rule consequent out of range");
      for (const json& jc : jr.at("conditions")) {
        Condition c;
        c.feature = jc.at("feature").get<std::size_t>();
        c.term = jc.at("term").get<std::size_t>();
        if (c.feature >= rb.partitions.n_features() || c.term >= rb.partitions.feature(c.feature).n_terms())
          throw DataError("condition refers to an unknown feature or term");
        c.feature_name = jc.at("feature_name").get<std::string>();
        c.term_name = jc.at("term_name").get<std::string>();
        c.label_weight = jc.at("label_weight").get<double>();
        c.slot_weight = jc.at("slot_weight").get<double>();
        c.keep_weight = jc.at("keep_weight").get<double>();
        r.conditions.push_back(std::move(c));
      }
      rb.rules.push_back(std::move(r));
    }
    return rb;
  });
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

void write_json(const json& doc, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

std::string document_kind(const json& doc) {
  if (!doc.is_object() || !doc.contains("kind") || !doc.at("kind").is_string()) throw DataError("document has no kind");
  return doc.at("kind").get<std::string>();
}

}  // namespace frr
