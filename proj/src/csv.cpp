#include "pype/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace pype {

ParseError::ParseError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

namespace {

template <typename T>
std::vector<std::vector<T>> parse_rows(std::string_view text, const std::string& source) {
  std::vector<std::vector<T>> rows;
  int line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) throw ParseError(source, line_no, "empty line");

    std::vector<T> row;
    while (true) {
      const auto comma = line.find(',');
      std::string_view field = line.substr(0, comma);
      while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
      while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
      T value{};
      const auto* first = field.data();
      const auto* last = field.data() + field.size();
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (field.empty() || ec != std::errc{} || ptr != last) {
        throw ParseError(source, line_no, "invalid number '" + std::string(field) + "'");
      }
      row.push_back(value);
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<std::vector<long long>> parse_int_rows(std::string_view text,
                                                   const std::string& source) {
  return parse_rows<long long>(text, source);
}

std::vector<std::vector<double>> parse_real_rows(std::string_view text,
                                                 const std::string& source) {
  return parse_rows<double>(text, source);
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace pype
