#include <doctest.h>

#include "frr/error.hpp"
#include "frr/serialize.hpp"
#include "helpers.hpp"

using namespace frr;
using nlohmann::json;

namespace {

FrrModel small_model(const std::string& name, std::uint64_t seed) {
  FrrConfig c;
  c.epochs = 20;
  c.seed = seed;
  return train_model(testing::load(name), c).model;
}

}  // namespace

TEST_CASE("model documents round-trip exactly") {
  const auto dir = testing::scratch("serialize_model");
  for (const char* name : {"iris", "monk-2"}) {
    const FrrModel m = small_model(name, 3);
    write_json(model_to_json(m), dir / "m.json");
    const FrrModel back = model_from_json(read_json(dir / "m.json"));
    CHECK(back.weights.values == m.weights.values);
    CHECK(back.class_names == m.class_names);
    CHECK(back.config.default_class == m.config.default_class);
    CHECK(back.config.keep_bias == m.config.keep_bias);
    const TabularDataset ds = testing::load(name);
    CHECK(predict_dataset(back, ds) == predict_dataset(m, ds));
    CHECK(model_to_json(back) == model_to_json(m));
  }
}

TEST_CASE("rule documents round-trip exactly") {
  const FrrModel m = small_model("iris", 4);
  const RuleBase rb = extract(m);
  const RuleBase back = rules_from_json(json::parse(rules_to_json(rb).dump()));
  CHECK(render_text(back) == render_text(rb));
  CHECK(rules_to_json(back) == rules_to_json(rb));
  const TabularDataset ds = testing::load("iris");
  for (std::size_t i = 0; i < ds.n_rows(); ++i)
    CHECK(evaluate_rulebase(back, ds.row(i)).scores == evaluate_rulebase(rb, ds.row(i)).scores);
}

TEST_CASE("documents carry a version and a kind") {
  const FrrModel m = small_model("iris", 5);
  const json doc = model_to_json(m);
  CHECK(doc.at("format_version") == kFormatVersion);
  CHECK(document_kind(doc) == "model");
  CHECK(document_kind(rules_to_json(extract(m))) == "rules");
  CHECK_THROWS_AS(rules_from_json(doc), DataError);
  json old = doc;
  old["format_version"] = 99;
  CHECK_THROWS_AS(model_from_json(old), DataError);
  CHECK_THROWS_AS(document_kind(json::array()), DataError);
}

TEST_CASE("malformed documents are data errors") {
  const FrrModel m = small_model("iris", 6);
  json doc = model_to_json(m);
  json bad = doc;
  bad["weights"].erase(0);
  CHECK_THROWS_AS(model_from_json(bad), DataError);
  bad = doc;
  bad["config"].erase("rules");
  CHECK_THROWS_AS(model_from_json(bad), DataError);
  bad = doc;
  bad["config"]["tnorm"]["kind"] = "maximum";
  CHECK_THROWS_AS(model_from_json(bad), DataError);
  bad = doc;
  bad["classes"] = json::array({"a", "b"});
  CHECK_THROWS_AS(model_from_json(bad), DataError);
  json rules = rules_to_json(extract(m));
  rules["rules"][0]["consequent"] = 7;
  CHECK_THROWS_AS(rules_from_json(rules), DataError);

  const auto dir = testing::scratch("serialize_bad");
  testing::write_text(dir / "broken.json", "{\"format_version\": 1,");
  CHECK_THROWS_AS(read_json(dir / "broken.json"), DataError);
  CHECK_THROWS_AS(read_json(dir / "absent.json"), DataError);
}

TEST_CASE("a model without a keep bias field loads with zero bias") {
  json doc = model_to_json(small_model("iris", 7));
  doc["config"].erase("keep_bias");
  CHECK(model_from_json(doc).config.keep_bias == 0.0);
}
