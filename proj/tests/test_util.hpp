#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "digitrec/audio.hpp"
#include "digitrec/rng.hpp"

#include <unistd.h>

namespace testutil {

constexpr double kPi = 3.14159265358979323846;

// Fresh scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("digitrec-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
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
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> sine(double freq, double amplitude, std::size_t n, int rate, double phase = 0.0) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = amplitude * std::sin(2.0 * kPi * freq * static_cast<double>(i) / rate + phase);
  }
  return out;
}

inline std::vector<double> random_vector(digitrec::Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> out(n);
  for (auto& v : out) v = rng.uniform(lo, hi);
  return out;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace testutil
