#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "frr/data.hpp"

namespace testing {

inline std::filesystem::path data_file(const std::string& name) { return std::filesystem::path(FRR_DATA_DIR) / name; }

/// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("frr_tests_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

inline frr::TabularDataset load(const std::string& name) {
  return frr::load_csv(data_file(name + ".csv"), "class");
}

}  // namespace testing
