#include "manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

#include "output.hpp"

namespace floqstab::cli {

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("SHA-256 failed");
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return sha256_hex(s.str());
}

RunManifest::RunManifest(std::string experiment, std::filesystem::path config,
                         std::filesystem::path out)
    : experiment_(std::move(experiment)),
      config_(std::move(config)),
      out_(std::move(out)),
      hash_(sha256_file(config_)) {}

void RunManifest::write() const {
  Json j;
  j["experiment"] = experiment_;
  j["config"] = config_.string();
  j["config_sha256"] = hash_;
  j["output_dir"] = out_.string();
  j["tool_version"] = tool_version;
  j["status"] = status_;
  j["outputs"] = outputs_;
  Json timings = Json::object();
  for (const auto& [name, s] : stages_) timings[name] = s;
  j["timings_s"] = timings;
  j["wall_clock_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  write_json(out_ / "manifest.json", j);
}

}  // namespace floqstab::cli
