#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace artex {

/// Shortest round-trip decimal form ("%.17g" trimmed where exact).
std::string format_double(double v);

/// RFC 4180 style writer; fields containing `,`, `"` or newlines are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& out_;
};

/// Splits one CSV record. Returns false on an unterminated quote.
bool split_csv_line(std::string_view line, std::vector<std::string>& fields);

}  // namespace artex
