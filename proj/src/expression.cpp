#include "qft/expression.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <variant>

#include <fmt/format.h>

#include "qft/error.hpp"

namespace qft {

struct CoefficientExpression::Node {
  struct Number {
    double value;
  };
  struct Parameter {
    std::size_t index;
  };
  struct Negate {
    std::shared_ptr<const Node> operand;
  };
  struct Binary {
    char op;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  std::variant<Number, Parameter, Negate, Binary> value;
};

namespace {

using NodePtr = std::shared_ptr<const CoefficientExpression::Node>;
using Node = CoefficientExpression::Node;

NodePtr make(Node::Number n) { return std::make_shared<const Node>(Node{n}); }
NodePtr make(Node::Parameter p) { return std::make_shared<const Node>(Node{p}); }
NodePtr make(Node::Negate n) { return std::make_shared<const Node>(Node{std::move(n)}); }
NodePtr make(Node::Binary b) { return std::make_shared<const Node>(Node{std::move(b)}); }

class Parser {
public:
  Parser(std::string_view text, std::span<const std::string> parameters)
      : text_(text), parameters_(parameters) {}

  NodePtr parse() {
    skip_space();
    if (pos_ == text_.size()) fail("empty expression");
    NodePtr root = additive();
    skip_space();
    if (pos_ != text_.size()) fail(fmt::format("unexpected '{}'", text_[pos_]));
    return root;
  }

private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::SyntaxError, fmt::format("{} at position {} in \"{}\"", what, pos_, text_));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr additive() {
    NodePtr lhs = multiplicative();
    for (;;) {
      if (accept('+')) lhs = make(Node::Binary{'+', lhs, multiplicative()});
      else if (accept('-')) lhs = make(Node::Binary{'-', lhs, multiplicative()});
      else return lhs;
    }
  }

  NodePtr multiplicative() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Node::Binary{'*', lhs, unary()});
      else if (accept('/')) lhs = make(Node::Binary{'/', lhs, unary()});
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Node::Negate{unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Node::Binary{'^', base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ == text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = additive();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(fmt::format("unexpected '{}'", c));
  }

  NodePtr number() {
    double value = 0.0;
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return make(Node::Number{value});
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    auto it = std::find(parameters_.begin(), parameters_.end(), name);
    if (it == parameters_.end())
      throw Error(ErrorKind::UnknownParameter, fmt::format("unknown parameter '{}' in \"{}\"", name, text_));
    return make(Node::Parameter{static_cast<std::size_t>(it - parameters_.begin())});
  }

  std::string_view text_;
  std::span<const std::string> parameters_;
  std::size_t pos_ = 0;
};

double eval_node(const Node& node, std::span<const double> values) {
  return std::visit(
      [&](const auto& n) -> double {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Number>) {
          return n.value;
        } else if constexpr (std::is_same_v<T, Node::Parameter>) {
          if (n.index >= values.size())
            throw Error(ErrorKind::InvalidArgument, "parameter vector too short for expression");
          return values[n.index];
        } else if constexpr (std::is_same_v<T, Node::Negate>) {
          return -eval_node(*n.operand, values);
        } else {
          const double a = eval_node(*n.lhs, values);
          const double b = eval_node(*n.rhs, values);
          switch (n.op) {
          case '+': return a + b;
          case '-': return a - b;
          case '*': return a * b;
          case '/': return a / b;
          default: return std::pow(a, b);
          }
        }
      },
      node.value);
}

void collect(const Node& node, std::vector<std::size_t>& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Node::Parameter>) {
          out.push_back(n.index);
        } else if constexpr (std::is_same_v<T, Node::Negate>) {
          collect(*n.operand, out);
        } else if constexpr (std::is_same_v<T, Node::Binary>) {
          collect(*n.lhs, out);
          collect(*n.rhs, out);
        }
      },
      node.value);
}

} // namespace

CoefficientExpression CoefficientExpression::parse(std::string_view text,
                                                   std::span<const std::string> parameters) {
  CoefficientExpression expr;
  expr.root_ = Parser(text, parameters).parse();
  expr.text_ = std::string(text);
  return expr;
}

CoefficientExpression CoefficientExpression::constant(double value) {
  CoefficientExpression expr;
  expr.root_ = make(Node::Number{value});
  expr.text_ = fmt::format("{}", value);
  return expr;
}

double CoefficientExpression::evaluate(std::span<const double> values) const {
  const double v = eval_node(*root_, values);
  if (!std::isfinite(v))
    throw Error(ErrorKind::NonFiniteValue, fmt::format("expression \"{}\" is not finite", text_));
  return v;
}

std::vector<std::size_t> CoefficientExpression::referenced_parameters() const {
  std::vector<std::size_t> out;
  collect(*root_, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool CoefficientExpression::is_constant() const { return referenced_parameters().empty(); }

} // namespace qft
