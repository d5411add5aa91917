#pragma once

#include <filesystem>
#include <fstream>
#include <string>

namespace testsupport {

inline std::filesystem::path data_dir() {
  return std::filesystem::path(PHYTOSUB_DATA_DIR);
}

inline std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "phytosub_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path temp_path(const std::string& name) {
  return temp_dir() / name;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace testsupport
