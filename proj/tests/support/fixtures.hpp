#pragma once

#include <filesystem>
#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "marvin/catalog.hpp"

namespace marvin::testing {

namespace fs = std::filesystem;

inline fs::path fixtures_dir() { return MARVIN_FIXTURES; }
inline fs::path golden_dir() { return MARVIN_GOLDEN; }

inline std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path &p, const std::string &text) {
  std::ofstream(p, std::ios::binary) << text;
}

/// Ingests <dir>/{primitives,datasets,problems}/*.json in name order.
inline void load_catalog_dir(Catalog &catalog, const fs::path &dir) {
  for (auto kind : {DocKind::Primitive, DocKind::Dataset, DocKind::Problem}) {
    fs::path sub = dir / directory_name(kind);
    if (!fs::is_directory(sub)) continue;
    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(sub)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto &f : files) {
      auto r = catalog.ingest(read_file(f), kind);
      if (!r) throw std::runtime_error("fixture rejected: " + f.string());
    }
  }
}

/// Fresh empty directory under the system temp dir.
class TempDir {
 public:
  explicit TempDir(const std::string &tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("marvin-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const fs::path &path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace marvin::testing
