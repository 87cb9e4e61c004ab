#include "soligas_cli/csv.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include "soligas/error.hpp"

namespace soligas::cli {

std::string format_number(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::sep() {
  if (col_ >= columns_) throw Error(ErrorKind::InvalidArgument, "CSV row has too many fields");
  if (col_++ > 0) out_ << ',';
}

CsvWriter& CsvWriter::operator<<(double v) {
  sep();
  out_ << format_number(v);
  return *this;
}

CsvWriter& CsvWriter::operator<<(long long v) {
  sep();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::operator<<(const std::string& s) {
  sep();
  out_ << s;
  return *this;
}

void CsvWriter::end_row() {
  if (col_ != columns_) throw Error(ErrorKind::InvalidArgument, "CSV row has too few fields");
  out_ << '\n';
  col_ = 0;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, ',')) {
    const auto a = cur.find_first_not_of(" \t\r");
    const auto b = cur.find_last_not_of(" \t\r");
    f.push_back(a == std::string::npos ? "" : cur.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    auto f = split(line);
    if (t.header.empty()) {
      t.header = std::move(f);
      continue;
    }
    if (f.size() != t.header.size())
      throw Error(ErrorKind::InvalidArgument, path + ":" + std::to_string(lineno) + ": expected " +
                                                  std::to_string(t.header.size()) + " fields");
    t.rows.push_back(std::move(f));
  }
  if (t.header.empty()) throw Error(ErrorKind::InvalidArgument, path + ": empty CSV");
  return t;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorKind::InvalidArgument, "CSV column '" + name + "' missing");
}

double CsvTable::number(std::size_t row, std::size_t col) const {
  const auto& s = rows.at(row).at(col);
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size())
    throw Error(ErrorKind::InvalidArgument, "not a number: '" + s + "'");
  return v;
}

}  // namespace soligas::cli
