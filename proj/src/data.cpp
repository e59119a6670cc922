#include "frr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "frr/error.hpp"

namespace frr {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "?"; }

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

int FeatureSpec::category_index(const std::string& token) const {
  const auto it = std::find(categories.begin(), categories.end(), token);
  return it == categories.end() ? -1 : static_cast<int>(it - categories.begin());
}

bool parse_real(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

TabularDataset TabularDataset::subset(std::span<const std::size_t> indices) const {
  TabularDataset out;
  out.specs = specs;
  out.class_names = class_names;
  out.target_name = target_name;
  out.values.reserve(indices.size() * specs.size());
  out.targets.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto r = row(i);
    out.values.insert(out.values.end(), r.begin(), r.end());
    out.targets.push_back(targets[i]);
  }
  return out;
}

std::string TabularDataset::cell_text(std::size_t i, std::size_t j) const {
  const double v = values[i * specs.size() + j];
  if (specs[j].is_categorical()) return specs[j].categories.at(static_cast<std::size_t>(v));
  return format_real(v);
}

std::vector<std::size_t> TabularDataset::class_counts() const {
  std::vector<std::size_t> counts(n_classes(), 0);
  for (int t : targets) ++counts[static_cast<std::size_t>(t)];
  return counts;
}

int TabularDataset::majority_class() const {
  const auto counts = class_counts();
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

void TabularDataset::validate() const {
  if (values.size() != n_rows() * n_features()) throw DataError("row arity mismatch");
  std::set<std::string> names;
  for (const auto& spec : specs) {
    if (!names.insert(spec.name).second) throw DataError("duplicate feature name '" + spec.name + "'");
    if (spec.is_categorical() && spec.categories.size() < 2)
      throw DataError("categorical feature '" + spec.name + "' needs at least 2 categories");
    if (!spec.is_categorical() && !spec.categories.empty())
      throw DataError("continuous feature '" + spec.name + "' must not list categories");
  }
  for (std::size_t i = 0; i < n_rows(); ++i) {
    if (targets[i] < 0 || static_cast<std::size_t>(targets[i]) >= n_classes())
      throw DataError("target out of range at row " + std::to_string(i));
    for (std::size_t j = 0; j < n_features(); ++j) {
      const double v = values[i * n_features() + j];
      if (!std::isfinite(v)) throw DataError("non-finite value at row " + std::to_string(i));
      if (specs[j].is_categorical() &&
          (v < 0 || v != std::floor(v) || v >= static_cast<double>(specs[j].categories.size())))
        throw DataError("category index out of range at row " + std::to_string(i));
    }
  }
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      if (!cells.empty() && cells[0].rfind("\xEF\xBB\xBF", 0) == 0) cells[0].erase(0, 3);
      table.header = std::move(cells);
      have_header = true;
    } else {
      table.rows.push_back(std::move(cells));
    }
  }
  if (!have_header) throw DataError("'" + path.string() + "' has no header row");
  return table;
}

FeatureSpec infer_schema(const std::string& name, std::span<const std::string> column) {
  if (column.empty()) throw DataError("cannot infer the kind of empty column '" + name + "'");
  bool numeric = true;
  bool integral = true;
  std::set<std::string> tokens;
  std::map<double, std::string> numeric_tokens;
  for (const auto& cell : column) {
    double v = 0;
    if (numeric && parse_real(cell, v)) {
      integral = integral && v == std::floor(v);
      numeric_tokens.emplace(v, cell);
    } else {
      numeric = false;
    }
    tokens.insert(cell);
  }
  FeatureSpec spec{name, FeatureKind::continuous, {}};
  if (!numeric) {
    spec.kind = FeatureKind::categorical;
    spec.categories.assign(tokens.begin(), tokens.end());
    if (spec.categories.size() < 2)
      throw DataError("column '" + name + "' holds a single non-numeric value");
  } else if (integral && numeric_tokens.size() <= 10 && numeric_tokens.size() >= 2) {
    spec.kind = FeatureKind::categorical;
    // Numeric order; one token per distinct value.
    for (const auto& [value, token] : numeric_tokens) spec.categories.push_back(token);
  }
  return spec;
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("invalid schema '" + path.string() + "': " + e.what());
  }
  Schema schema;
  for (const auto& [column, entry] : doc.items()) {
    FeatureSpec spec{column, FeatureKind::continuous, {}};
    const std::string kind = entry.value("kind", "continuous");
    if (kind == "categorical") {
      spec.kind = FeatureKind::categorical;
      if (entry.contains("categories"))
        for (const auto& c : entry["categories"]) spec.categories.push_back(c.is_string() ? c.get<std::string>() : c.dump());
    } else if (kind != "continuous") {
      throw DataError("schema column '" + column + "' has unknown kind '" + kind + "'");
    }
    schema.emplace(column, std::move(spec));
  }
  return schema;
}

TabularDataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                        const std::optional<Schema>& schema) {
  const CsvTable table = read_csv_table(path);
  const auto target_it = std::find(table.header.begin(), table.header.end(), target_column);
  if (target_it == table.header.end())
    throw DataError("target column '" + target_column + "' not found in '" + path.string() + "'");
  const std::size_t target_col = static_cast<std::size_t>(target_it - table.header.begin());
  const std::size_t width = table.header.size();

  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != width)
      throw DataError("row " + std::to_string(i + 1) + " has " + std::to_string(table.rows[i].size()) +
                      " cells, expected " + std::to_string(width));
    for (std::size_t j = 0; j < width; ++j)
      if (is_missing(table.rows[i][j]))
        throw DataError("missing value in row " + std::to_string(i + 1) + ", column '" + table.header[j] + "'");
  }

  TabularDataset ds;
  ds.target_name = target_column;
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < width; ++j) {
    if (j == target_col) continue;
    feature_cols.push_back(j);
    std::vector<std::string> column;
    column.reserve(table.rows.size());
    for (const auto& row : table.rows) column.push_back(row[j]);
    std::optional<FeatureSpec> declared;
    if (schema) {
      if (auto it = schema->find(table.header[j]); it != schema->end()) declared = it->second;
    }
    if (declared) {
      declared->name = table.header[j];
      if (declared->is_categorical() && declared->categories.empty())
        declared->categories = infer_schema(table.header[j], column).categories;
      if (declared->is_categorical() && declared->categories.empty()) {
        std::set<std::string> tokens(column.begin(), column.end());
        declared->categories.assign(tokens.begin(), tokens.end());
      }
      ds.specs.push_back(*declared);
    } else if (column.empty()) {
      ds.specs.push_back({table.header[j], FeatureKind::continuous, {}});
    } else {
      ds.specs.push_back(infer_schema(table.header[j], column));
    }
  }

  std::unordered_map<std::string, int> class_index;
  ds.values.reserve(table.rows.size() * feature_cols.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      const auto& cell = row[feature_cols[f]];
      const auto& spec = ds.specs[f];
      if (spec.is_categorical()) {
        const int idx = spec.category_index(cell);
        if (idx < 0)
          throw DataError("row " + std::to_string(i + 1) + ": '" + cell + "' is not a category of '" + spec.name + "'");
        ds.values.push_back(idx);
      } else {
        double v = 0;
        if (!parse_real(cell, v))
          throw DataError("row " + std::to_string(i + 1) + ": cannot parse '" + cell + "' in continuous column '" +
                          spec.name + "'");
        ds.values.push_back(v);
      }
    }
    const auto& label = row[target_col];
    auto [it, inserted] = class_index.emplace(label, static_cast<int>(ds.class_names.size()));
    if (inserted) ds.class_names.push_back(label);
    ds.targets.push_back(it->second);
  }
  ds.validate();
  return ds;
}

void write_csv(const TabularDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const auto& spec : dataset.specs) out << quote_if_needed(spec.name) << ',';
  out << quote_if_needed(dataset.target_name) << '\n';
  for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
    for (std::size_t j = 0; j < dataset.n_features(); ++j) out << quote_if_needed(dataset.cell_text(i, j)) << ',';
    out << quote_if_needed(dataset.class_names[static_cast<std::size_t>(dataset.targets[i])]) << '\n';
  }
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

FoldPlan stratified_kfold(const TabularDataset& dataset, std::size_t k, std::uint64_t seed) {
  const std::size_t n = dataset.n_rows();
  if (k < 2) throw std::invalid_argument("fold count must be at least 2");
  if (k > n) throw std::invalid_argument("fold count " + std::to_string(k) + " exceeds row count " + std::to_string(n));
  std::vector<std::vector<std::size_t>> by_class(dataset.n_classes());
  for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(dataset.targets[i])].push_back(i);
  for (std::size_t c = 0; c < by_class.size(); ++c)
    if (by_class[c].empty()) throw std::invalid_argument("class '" + dataset.class_names[c] + "' has no samples");

  FoldPlan plan{k, std::vector<std::size_t>(n, 0), seed};
  std::mt19937_64 rng(seed);
  // Classes are dealt round-robin with a running offset, so per-class counts
  // are floor/ceil of N_c/k and fold sizes differ by at most one.
  std::size_t offset = 0;
  for (auto& members : by_class) {
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng() % i]);
    for (std::size_t i = 0; i < members.size(); ++i) plan.assignments[members[i]] = (offset + i) % k;
    offset += members.size();
  }
  return plan;
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty list");
  if (!(q >= 0.0 && q <= 100.0)) throw std::invalid_argument("percentile q must lie in [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace frr
