#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "xgen/model/parser.hpp"

namespace xgen::fixtures {

inline std::filesystem::path fixture_dir() { return XGEN_FIXTURE_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::vector<std::filesystem::path> x_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.path().extension() == ".x") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

inline std::vector<model::ModelUnit> load_units(const std::filesystem::path& dir) {
  std::vector<model::ModelUnit> units;
  for (const auto& file : x_files(dir)) {
    auto parsed = model::parse_units(read_file(file), file.string());
    units.insert(units.end(), parsed.begin(), parsed.end());
  }
  return units;
}

inline std::vector<model::ModelUnit> aircraft_units() {
  return load_units(fixture_dir() / "aircraft" / "reference");
}

}  // namespace xgen::fixtures
