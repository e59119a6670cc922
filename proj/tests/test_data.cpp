#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "frr/data.hpp"
#include "frr/error.hpp"
#include "helpers.hpp"

using namespace frr;

TEST_CASE("iris loads with four continuous features and three classes") {
  const TabularDataset ds = testing::load("iris");
  CHECK(ds.n_rows() == 150);
  CHECK(ds.n_features() == 4);
  CHECK(ds.n_classes() == 3);
  for (const auto& s : ds.specs) CHECK_FALSE(s.is_categorical());
}

TEST_CASE("a single data row gives a one-row dataset") {
  const auto dir = testing::scratch("one_row");
  const auto path = testing::write_text(dir / "one.csv", "x,y,class\n1.5,2.5,a\n");
  const TabularDataset ds = load_csv(path, "class");
  CHECK(ds.n_rows() == 1);
  CHECK(ds.n_features() == 2);
}

TEST_CASE("short rows are rejected") {
  const auto dir = testing::scratch("arity");
  const auto path = testing::write_text(dir / "bad.csv", "a,b,c,d,class\n1,2,3,4,x\n1,2,x\n");
  CHECK_THROWS_AS(load_csv(path, "class"), DataError);
}

TEST_CASE("missing cells, missing target and missing files are data errors") {
  const auto dir = testing::scratch("missing");
  const auto gap = testing::write_text(dir / "gap.csv", "a,b,class\n1,,x\n2,3,y\n");
  CHECK_THROWS_AS(load_csv(gap, "class"), DataError);
  const auto ok = testing::write_text(dir / "ok.csv", "a,b,class\n1,2,x\n2,3,y\n");
  CHECK_THROWS_AS(load_csv(ok, "label"), DataError);
  CHECK_THROWS_AS(load_csv(dir / "absent.csv", "class"), DataError);
}

TEST_CASE("schema inference") {
  SUBCASE("non-numeric tokens are categorical") {
    const std::vector<std::string> col{"yes", "no", "yes", "no"};
    const FeatureSpec s = infer_schema("f", col);
    CHECK(s.is_categorical());
    CHECK(s.categories.size() == 2);
  }
  SUBCASE("many distinct reals are continuous") {
    std::vector<std::string> col;
    for (int i = 0; i < 200; ++i) col.push_back(std::to_string(0.5 + i * 0.013));
    CHECK_FALSE(infer_schema("f", col).is_categorical());
  }
  SUBCASE("few distinct integers are categorical") {
    std::vector<std::string> col;
    for (int i = 0; i < 500; ++i) col.push_back(std::to_string(i % 3));
    const FeatureSpec s = infer_schema("f", col);
    CHECK(s.is_categorical());
    CHECK(s.categories.size() == 3);
  }
  SUBCASE("eleven distinct integers are continuous") {
    std::vector<std::string> col;
    for (int i = 0; i < 110; ++i) col.push_back(std::to_string(i % 11));
    CHECK_FALSE(infer_schema("f", col).is_categorical());
  }
}

TEST_CASE("monk-2 infers six categorical features") {
  const TabularDataset ds = testing::load("monk-2");
  CHECK(ds.n_features() == 6);
  CHECK(std::count_if(ds.specs.begin(), ds.specs.end(), [](const FeatureSpec& s) { return s.is_categorical(); }) == 6);
}

TEST_CASE("a schema sidecar overrides inference") {
  const auto schema = load_schema(testing::data_file("wisconsin.schema.json"));
  const TabularDataset ds = load_csv(testing::data_file("wisconsin.csv"), "class", schema);
  CHECK(ds.n_features() == 9);
  for (const auto& s : ds.specs) CHECK_FALSE(s.is_categorical());
  const TabularDataset inferred = load_csv(testing::data_file("wisconsin.csv"), "class");
  CHECK(std::all_of(inferred.specs.begin(), inferred.specs.end(),
                    [](const FeatureSpec& s) { return s.is_categorical(); }));
}

TEST_CASE("classes are indexed in first-appearance order") {
  const auto dir = testing::scratch("order");
  const auto path = testing::write_text(dir / "o.csv", "x,class\n1,b\n2,a\n3,b\n4,c\n");
  const TabularDataset ds = load_csv(path, "class");
  CHECK(ds.class_names == std::vector<std::string>{"b", "a", "c"});
  CHECK(ds.targets == std::vector<int>{0, 1, 0, 2});
}

TEST_CASE("load, write, load round-trips") {
  const auto dir = testing::scratch("roundtrip");
  for (const char* name : {"iris", "monk-2", "pima"}) {
    const TabularDataset a = testing::load(name);
    write_csv(a, dir / "copy.csv");
    const TabularDataset b = load_csv(dir / "copy.csv", "class");
    CHECK(b.values == a.values);
    CHECK(b.targets == a.targets);
    CHECK(b.class_names == a.class_names);
    REQUIRE(b.specs.size() == a.specs.size());
    for (std::size_t j = 0; j < a.specs.size(); ++j) {
      CHECK(b.specs[j].name == a.specs[j].name);
      CHECK(b.specs[j].kind == a.specs[j].kind);
      CHECK(b.specs[j].categories == a.specs[j].categories);
    }
  }
}

namespace {

TabularDataset synthetic(std::vector<std::size_t> per_class) {
  TabularDataset ds;
  ds.specs = {{"x", FeatureKind::continuous, {}}};
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    ds.class_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < per_class[c]; ++i) {
      ds.values.push_back(static_cast<double>(ds.targets.size()));
      ds.targets.push_back(static_cast<int>(c));
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("stratified folds with exact divisibility") {
  const TabularDataset ds = synthetic({50, 50});
  const FoldPlan plan = stratified_kfold(ds, 5, 3);
  for (std::size_t f = 0; f < 5; ++f) {
    const auto test = plan.test_indices(f);
    CHECK(test.size() == 20);
    std::size_t zeros = 0;
    for (auto i : test) zeros += ds.targets[i] == 0;
    CHECK(zeros == 10);
  }
}

TEST_CASE("fold plans are deterministic and validated") {
  const TabularDataset ds = synthetic({7, 13});
  CHECK(stratified_kfold(ds, 4, 9).assignments == stratified_kfold(ds, 4, 9).assignments);
  CHECK(stratified_kfold(ds, 4, 9).assignments != stratified_kfold(ds, 4, 10).assignments);
  CHECK_THROWS(stratified_kfold(synthetic({2, 3}), 6, 0));
  CHECK_THROWS(stratified_kfold(ds, 1, 0));
}

TEST_CASE("property: folds partition the rows and respect class balance") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t classes = 2 + rng() % 4;
    std::vector<std::size_t> counts(classes);
    for (auto& c : counts) c = 1 + rng() % 40;
    const TabularDataset ds = synthetic(counts);
    const std::size_t k = 2 + rng() % std::min<std::size_t>(9, ds.n_rows() - 1);
    const FoldPlan plan = stratified_kfold(ds, k, rng());
    std::vector<std::size_t> seen(ds.n_rows(), 0);
    for (std::size_t f = 0; f < k; ++f) {
      const auto test = plan.test_indices(f);
      const auto train = plan.train_indices(f);
      CHECK(test.size() + train.size() == ds.n_rows());
      for (auto i : test) ++seen[i];
      for (std::size_t c = 0; c < classes; ++c) {
        const double expected = static_cast<double>(counts[c]) / static_cast<double>(k);
        const auto got = std::count_if(test.begin(), test.end(), [&](std::size_t i) { return ds.targets[i] == int(c); });
        CHECK(std::abs(static_cast<double>(got) - expected) <= 1.0);
      }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](std::size_t s) { return s == 1; }));
  }
}

TEST_CASE("percentile by linear interpolation") {
  std::vector<double> v(101);
  std::iota(v.begin(), v.end(), 0.0);
  std::shuffle(v.begin(), v.end(), std::mt19937_64(1));
  CHECK(percentile(v, 20) == doctest::Approx(20.0));
  CHECK(percentile(v, 0) == 0.0);
  CHECK(percentile(v, 100) == 100.0);
  // hand oracle: sorted {1,2,4,8}, q=50 -> rank 1.5 -> 2 + 0.5*(4-2)
  const std::vector<double> w{8, 1, 4, 2};
  CHECK(percentile(w, 50) == doctest::Approx(3.0));
  CHECK(percentile(w, 25) == doctest::Approx(1.75));
  const std::vector<double> flat(9, 7.0);
  for (double q : {0.0, 13.0, 50.0, 100.0}) CHECK(percentile(flat, q) == 7.0);
  CHECK_THROWS(percentile(std::vector<double>{}, 50));
  CHECK_THROWS(percentile(w, 101));
}

TEST_CASE("property: percentile is monotone in q") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> v(1 + rng() % 50);
    for (auto& x : v) x = normal(rng);
    double prev = percentile(v, 0);
    for (double q = 1; q <= 100; q += 1) {
      const double p = percentile(v, q);
      CHECK(p >= prev);
      prev = p;
    }
  }
}
