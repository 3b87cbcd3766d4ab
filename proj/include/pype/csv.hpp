#ifndef PYPE_CSV_HPP
#define PYPE_CSV_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pype {

/// Malformed text input. what() reads "<source>:<line>: <message>".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, int line, const std::string& message);

  int line() const { return line_; }

 private:
  int line_;
};

std::vector<std::vector<long long>> parse_int_rows(std::string_view text,
                                                   const std::string& source = "<input>");
std::vector<std::vector<double>> parse_real_rows(std::string_view text,
                                                 const std::string& source = "<input>");

/// Shortest decimal form that parses back to the identical double.
std::string format_real(double value);

std::string read_file(const std::string& path);
/// Throws std::runtime_error when the file cannot be written.
void write_file(const std::string& path, std::string_view contents);

}  // namespace pype

#endif  // PYPE_CSV_HPP
