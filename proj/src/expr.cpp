#include "rocs/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace rocs {

namespace {

enum UnaryOp { u_neg, u_sin, u_cos, u_tan, u_asin, u_acos, u_atan, u_sinh, u_cosh, u_tanh, u_exp, u_log, u_log10, u_sqrt, u_abs, u_sign };
enum BinaryOp { b_add, b_sub, b_mul, b_div, b_pow, b_atan2, b_min, b_max };

struct FnEntry {
  const char* name;
  int arity;
  int id;
};

constexpr FnEntry kFunctions[] = {
    {"sin", 1, u_sin},     {"cos", 1, u_cos},   {"tan", 1, u_tan},   {"asin", 1, u_asin},
    {"acos", 1, u_acos},   {"atan", 1, u_atan}, {"sinh", 1, u_sinh}, {"cosh", 1, u_cosh},
    {"tanh", 1, u_tanh},   {"exp", 1, u_exp},   {"log", 1, u_log},   {"log10", 1, u_log10},
    {"sqrt", 1, u_sqrt},   {"abs", 1, u_abs},   {"sign", 1, u_sign}, {"atan2", 2, b_atan2},
    {"pow", 2, b_pow},     {"min", 2, b_min},   {"max", 2, b_max},
};

double apply_unary(int id, double a) {
  switch (id) {
    case u_neg: return -a;
    case u_sin: return std::sin(a);
    case u_cos: return std::cos(a);
    case u_tan: return std::tan(a);
    case u_asin: return std::asin(a);
    case u_acos: return std::acos(a);
    case u_atan: return std::atan(a);
    case u_sinh: return std::sinh(a);
    case u_cosh: return std::cosh(a);
    case u_tanh: return std::tanh(a);
    case u_exp: return std::exp(a);
    case u_log: return std::log(a);
    case u_log10: return std::log10(a);
    case u_sqrt: return std::sqrt(a);
    case u_abs: return std::abs(a);
    case u_sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
  }
  return 0.0;
}

double apply_binary(int id, double a, double b) {
  switch (id) {
    case b_add: return a + b;
    case b_sub: return a - b;
    case b_mul: return a * b;
    case b_div: return a / b;
    case b_pow: return std::pow(a, b);
    case b_atan2: return std::atan2(a, b);
    case b_min: return std::min(a, b);
    case b_max: return std::max(a, b);
  }
  return 0.0;
}

}  // namespace

class ExprParser {
 public:
  ExprParser(const std::string& text, const std::vector<std::string>& variables)
      : text_(text), vars_(variables) {}

  Expr run() {
    Expr e;
    e.text_ = text_;
    out_ = &e;
    parse_sum();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    e.max_stack_ = max_depth_;
    return e;
  }

 private:
  const std::string& text_;
  const std::vector<std::string>& vars_;
  Expr* out_ = nullptr;
  size_t pos_ = 0;
  int depth_ = 0, max_depth_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw std::invalid_argument("expression error at position " + std::to_string(pos_) + ": " +
                                what + " in \"" + text_ + "\"");
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_space();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  void push(Expr::Node n, int stack_delta) {
    out_->program_.push_back(n);
    depth_ += stack_delta;
    max_depth_ = std::max(max_depth_, depth_);
  }

  void emit_number(double v) { push({Expr::Kind::number, 0, v}, +1); }
  void emit_variable(int i) { push({Expr::Kind::variable, i, 0.0}, +1); }
  void emit_unary(int id) { push({Expr::Kind::unary, id, 0.0}, 0); }
  void emit_binary(int id) { push({Expr::Kind::binary, id, 0.0}, -1); }

  void parse_sum() {
    parse_product();
    for (;;) {
      if (consume('+')) {
        parse_product();
        emit_binary(b_add);
      } else if (consume('-')) {
        parse_product();
        emit_binary(b_sub);
      } else {
        return;
      }
    }
  }

  void parse_product() {
    parse_unary();
    for (;;) {
      if (consume('*')) {
        parse_unary();
        emit_binary(b_mul);
      } else if (consume('/')) {
        parse_unary();
        emit_binary(b_div);
      } else {
        return;
      }
    }
  }

  void parse_unary() {
    if (consume('-')) {
      parse_unary();
      emit_unary(u_neg);
    } else if (consume('+')) {
      parse_unary();
    } else {
      parse_power();
    }
  }

  // Right-associative, exponent may itself be signed: 2^-3, 2^3^2 == 2^(3^2).
  void parse_power() {
    parse_primary();
    if (consume('^')) {
      parse_unary();
      emit_binary(b_pow);
    }
  }

  void parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("expected a value");
    const char c = text_[pos_];

    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += size_t(end - begin);
      emit_number(v);
      return;
    }

    if (c == '(') {
      ++pos_;
      parse_sum();
      if (!consume(')')) fail("expected ')'");
      return;
    }

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t end = pos_;
      while (end < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
        ++end;
      const std::string name = text_.substr(pos_, end - pos_);
      pos_ = end;

      // Variables shadow constants and functions of the same name.
      for (size_t i = 0; i < vars_.size(); ++i) {
        if (vars_[i] == name) {
          emit_variable(int(i));
          return;
        }
      }
      if (peek() == '(') {
        for (const FnEntry& fn : kFunctions) {
          if (name == fn.name) {
            consume('(');
            parse_sum();
            if (fn.arity == 2) {
              if (!consume(',')) fail("function " + name + " expects two arguments");
              parse_sum();
              emit_binary(fn.id);
            } else {
              if (peek() == ',') fail("function " + name + " expects one argument");
              emit_unary(fn.id);
            }
            if (!consume(')')) fail("expected ')'");
            return;
          }
        }
        fail("unknown function \"" + name + "\"");
      }
      if (name == "pi") {
        emit_number(3.14159265358979323846);
        return;
      }
      if (name == "e") {
        emit_number(2.71828182845904523536);
        return;
      }
      fail("unknown identifier \"" + name + "\"");
    }

    fail(std::string("unexpected character '") + c + "'");
  }
};

Expr Expr::parse(const std::string& text, const std::vector<std::string>& variables) {
  return ExprParser(text, variables).run();
}

double Expr::eval(const double* values) const {
  double fixed[32];
  std::vector<double> heap;
  double* stack = fixed;
  if (max_stack_ > 32) {
    heap.resize(size_t(max_stack_));
    stack = heap.data();
  }
  int top = 0;
  for (const Node& n : program_) {
    switch (n.kind) {
      case Kind::number: stack[top++] = n.value; break;
      case Kind::variable: stack[top++] = values[n.id]; break;
      case Kind::unary: stack[top - 1] = apply_unary(n.id, stack[top - 1]); break;
      case Kind::binary:
        stack[top - 2] = apply_binary(n.id, stack[top - 2], stack[top - 1]);
        --top;
        break;
    }
  }
  return top == 1 ? stack[0] : 0.0;
}

}  // namespace rocs
