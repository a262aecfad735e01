#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace floqstab::cli {

inline constexpr const char* tool_version = "1.0.0";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

// One per output directory: what ran, on which config, and how long each stage took.
class RunManifest {
 public:
  RunManifest(std::string experiment, std::filesystem::path config, std::filesystem::path out);

  void stage(const std::string& name, double seconds) { stages_.emplace_back(name, seconds); }
  void add_output(const std::string& file) { outputs_.push_back(file); }
  void set_status(std::string status) { status_ = std::move(status); }
  // writes <out>/manifest.json, replacing any previous manifest
  void write() const;

  const std::string& config_hash() const { return hash_; }

 private:
  std::string experiment_;
  std::filesystem::path config_, out_;
  std::string hash_;
  std::string status_ = "ok";
  std::vector<std::pair<std::string, double>> stages_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// wall-clock stopwatch for stage timings
class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - t_).count();
    t_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point t_ = std::chrono::steady_clock::now();
};

}  // namespace floqstab::cli
