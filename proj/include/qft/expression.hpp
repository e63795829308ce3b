#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qft {

/// Arithmetic over named parameters: numbers, identifiers, + - * / ^, unary
/// minus and parentheses. `^` binds tightest and is right-associative; unary
/// minus sits between `^` and the multiplicative operators.
class CoefficientExpression {
public:
  struct Node;

  /// Parses `text`; every identifier must appear in `parameters`. Throws
  /// SyntaxError (with the character offset) or UnknownParameter.
  static CoefficientExpression parse(std::string_view text, std::span<const std::string> parameters);

  static CoefficientExpression constant(double value);

  /// Values are indexed like the `parameters` list given to parse().
  double evaluate(std::span<const double> values) const;

  const std::string& text() const noexcept { return text_; }

  /// Indices of the parameters the expression reads.
  std::vector<std::size_t> referenced_parameters() const;

  bool is_constant() const;

private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

} // namespace qft
