#pragma once

// Small fixtures shared by the test binaries.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>

#include <unistd.h>

#include "stacklp/dataspace.hpp"

namespace support {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("stacklp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
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

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline stacklp::Labels labels(std::initializer_list<int> v) {
  stacklp::Labels t(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const int x : v) t(i++) = x;
  return t;
}

// Dataset with one feature equal to the row index.
inline stacklp::LabeledDataset line_dataset(const stacklp::Labels& t) {
  stacklp::LabeledDataset ds;
  ds.features = Eigen::VectorXd::LinSpaced(t.size(), 0.0, static_cast<double>(t.size() - 1));
  ds.targets = t;
  ds.feature_names = {"x"};
  ds.id = "line";
  return ds;
}

}  // namespace support
