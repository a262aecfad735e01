#include "output.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace floqstab::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : out_(path, std::ios::binary), columns_(header.size()), path_(path) {
  if (!out_) throw std::runtime_error("cannot write " + path.string());
  for (const auto& h : header) cell(h);
  end_row();
}

void CsvWriter::cell(const std::string& text) {
  if (filled_ == columns_) throw std::logic_error(path_.string() + ": too many cells in row");
  if (filled_++) out_ << ',';
  if (text.find_first_of(",\"\n") == std::string::npos) {
    out_ << text;
    return;
  }
  out_ << '"';
  for (char c : text) out_ << (c == '"' ? "\"\"" : std::string(1, c));
  out_ << '"';
}

CsvWriter& CsvWriter::operator<<(double v) {
  cell(format_number(v));
  return *this;
}
CsvWriter& CsvWriter::operator<<(int v) {
  cell(std::to_string(v));
  return *this;
}
CsvWriter& CsvWriter::operator<<(const std::string& v) {
  cell(v);
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_) throw std::logic_error(path_.string() + ": incomplete row");
  out_ << '\n';
  filled_ = 0;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  throw std::runtime_error("CSV has no column '" + name + "'");
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  const int c = column(name);
  std::vector<double> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::string& s = rows[r].at(c);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0')
      throw std::runtime_error("row " + std::to_string(r + 2) + ", column '" + name +
                               "': not a number");
    out.push_back(v);
  }
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  CsvTable t;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  auto flush_row = [&] {
    row.push_back(cell);
    cell.clear();
    if (t.header.empty()) {
      t.header = row;
    } else if (!(row.size() == 1 && row[0].empty())) {
      if (row.size() != t.header.size())
        throw std::runtime_error(path.string() + ": row " + std::to_string(t.rows.size() + 2) +
                                 " has " + std::to_string(row.size()) + " cells");
      t.rows.push_back(row);
    }
    row.clear();
    any = false;
  };
  for (char c; in.get(c);) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          cell += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(cell);
      cell.clear();
    } else if (c == '\n') {
      flush_row();
    } else if (c != '\r') {
      cell += c;
    }
  }
  if (any) flush_row();
  if (t.header.empty()) throw std::runtime_error(path.string() + ": empty CSV");
  return t;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace floqstab::cli
