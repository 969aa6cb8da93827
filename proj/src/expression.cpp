#include "heatlocus/expression.hpp"

#include <cctype>
#include <cstdlib>
#include <numbers>

namespace heatlocus {

class ExpressionParser {
 public:
  explicit ExpressionParser(const std::string& text) : s_(text) { expr_.text_ = text; }

  Expression run() {
    expr_.root_ = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return std::move(expr_);
  }

 private:
  using Op = Expression::Op;

  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorKind::Parse, "expression '" + s_ + "', column " + std::to_string(pos_ + 1) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int add(Expression::Node n) {
    expr_.nodes_.push_back(n);
    return static_cast<int>(expr_.nodes_.size()) - 1;
  }
  int binary(Op op, int a, int b) { return add({op, 0.0, -1, a, b}); }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = binary(Op::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = binary(Op::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = binary(Op::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = binary(Op::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (accept('-')) return add({Op::Neg, 0.0, -1, parse_unary(), -1});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (accept('^')) return binary(Op::Pow, base, parse_unary());
    return base;
  }

  int parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) error("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!accept(')')) error("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) error("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return add({Op::Const, v});
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "pi") return add({Op::Const, std::numbers::pi});
      if (id.size() >= 2 && id[0] == 'x' &&
          id.find_first_not_of("0123456789", 1) == std::string::npos) {
        const int k = std::stoi(id.substr(1));
        if (k < 1) {
          pos_ = start;
          error("variables are numbered from x1");
        }
        if (k > expr_.max_var_) expr_.max_var_ = k;
        return add({Op::Var, 0.0, k - 1});
      }
      Op op;
      if (id == "sin") op = Op::Sin;
      else if (id == "cos") op = Op::Cos;
      else if (id == "exp") op = Op::Exp;
      else if (id == "sqrt") op = Op::Sqrt;
      else if (id == "log") op = Op::Log;
      else if (id == "sinh") op = Op::Sinh;
      else if (id == "cosh") op = Op::Cosh;
      else {
        pos_ = start;
        error("unknown identifier '" + id + "'");
      }
      if (!accept('(')) error("expected '(' after " + id);
      const int arg = parse_expr();
      if (!accept(')')) error("expected ')'");
      return add({op, 0.0, -1, arg, -1});
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  std::string s_;
  std::size_t pos_ = 0;
  Expression expr_;
};

Expression Expression::parse(const std::string& text) { return ExpressionParser(text).run(); }

}  // namespace heatlocus
