#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace floqstab::cli {

using Json = nlohmann::ordered_json;

// shortest round-trip text for a double; non-finite values print as nan/inf
std::string format_number(double v);

// RFC 4180-style CSV with a fixed header; cells are quoted only when needed
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  CsvWriter& operator<<(double v);
  CsvWriter& operator<<(int v);
  CsvWriter& operator<<(const std::string& v);
  CsvWriter& operator<<(const char* v) { return *this << std::string(v); }
  void end_row();

 private:
  void cell(const std::string& text);
  std::ofstream out_;
  std::size_t columns_, filled_ = 0;
  std::filesystem::path path_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;  // throws if absent
  std::vector<double> numbers(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// non-finite doubles become null so the output stays valid JSON
Json number_or_null(double v);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace floqstab::cli
