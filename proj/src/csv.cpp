#include "qft/csv.hpp"

#include <charconv>
#include <cmath>

#include "qft/error.hpp"

namespace qft {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return {buf, end};
}

std::string format_bound(const BoundValue& value) {
  if (value.is_no_constraint()) return "NO_CONSTRAINT";
  if (value.is_infeasible()) return "INFEASIBLE";
  return format_number(value.db());
}

namespace {

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

} // namespace

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) { row(header); }

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw Error(ErrorKind::InvalidArgument, "CSV row has the wrong number of fields");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_ += ',';
    text_ += escape(fields[i]);
  }
  text_ += '\n';
}

} // namespace qft
