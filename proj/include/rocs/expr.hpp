#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rocs {

/// Compiled arithmetic expression over a fixed list of named variables.
///
/// Supports + - * / ^ (power, right-associative, binds tighter than unary
/// minus), parentheses, numeric literals, the constants pi and e, and the
/// functions sin cos tan asin acos atan sinh cosh tanh exp log log10 sqrt
/// abs sign (one argument) and atan2 pow min max (two arguments). A variable
/// name shadows a constant of the same name. Domain violations follow IEEE
/// semantics (nan/inf) rather than throwing; callers already guard against
/// non-finite values.
class Expr {
 public:
  Expr() = default;

  /// Throws std::invalid_argument with the offending position on a syntax
  /// error, an unknown identifier, or a wrong argument count.
  static Expr parse(const std::string& text, const std::vector<std::string>& variables);

  /// values holds one entry per variable passed to parse(), same order.
  double eval(const double* values) const;

  const std::string& text() const { return text_; }

 private:
  enum class Kind : std::uint8_t { number, variable, unary, binary };
  struct Node {
    Kind kind;
    int id = 0;  ///< variable index or operator/function id
    double value = 0.0;
  };

  std::vector<Node> program_;  ///< postfix order
  int max_stack_ = 0;
  std::string text_;

  friend class ExprParser;
};

}  // namespace rocs
