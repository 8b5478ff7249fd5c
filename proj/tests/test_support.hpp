#pragma once

#include <filesystem>
#include <fstream>
#include <chrono>
#include <string>

#include "polyfilter/random.hpp"

namespace test_support {

inline std::filesystem::path fixture_dir(const std::string& name) {
  return std::filesystem::path(POLYFILTER_FIXTURE_DIR) / name;
}

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    const auto stamp = static_cast<std::uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count());
    path_ = std::filesystem::temp_directory_path() /
            ("polyfilter-" + tag + "-" + std::to_string(polyfilter::derive_seed(stamp, ++counter) % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& content) { std::ofstream(p) << content; }

}  // namespace test_support
