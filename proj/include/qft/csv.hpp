#pragma once

#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "qft/bounds.hpp"

namespace qft {

/// Shortest decimal text that reads back to the same double; "inf", "-inf"
/// and "nan" for non-finite values.
std::string format_number(double value);

/// Finite value as a number, sentinels as NO_CONSTRAINT / INFEASIBLE.
std::string format_bound(const BoundValue& value);

class CsvWriter {
public:
  explicit CsvWriter(std::vector<std::string> header);

  void row(const std::vector<std::string>& fields);
  const std::string& text() const noexcept { return text_; }

private:
  std::size_t columns_;
  std::string text_;
};

} // namespace qft
