#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "heatlocus/errors.hpp"
#include "heatlocus/jet.hpp"

namespace heatlocus {

/// Small arithmetic-expression language used by structure config files.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | power
///   power   := primary ('^' unary)?
///   primary := number | 'pi' | xK | func '(' expr ')' | '(' expr ')'
///   func    := sin | cos | exp | sqrt | log | sinh | cosh
///
/// Variables are x1..xn (1-based). Evaluation is generic over the scalar
/// type so the same tree yields values, jets and series.
class Expression {
 public:
  static Expression parse(const std::string& text);

  /// Largest variable index referenced (0 if none).
  int max_variable() const { return max_var_; }
  const std::string& text() const { return text_; }

  template <class S>
  S eval(std::span<const S> x) const {
    require(static_cast<int>(x.size()) >= max_var_, ErrorKind::InvalidInput,
            "expression '" + text_ + "' needs " + std::to_string(max_var_) + " variables");
    return eval_node<S>(root_, x);
  }

  double operator()(std::span<const double> x) const { return eval<double>(x); }

 private:
  enum class Op : std::uint8_t { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt, Log, Sinh, Cosh };
  struct Node {
    Op op;
    double value = 0.0;
    int var = -1;
    int a = -1;
    int b = -1;
  };

  template <class S>
  S eval_node(int idx, std::span<const S> x) const {
    using std::cos;
    using std::cosh;
    using std::exp;
    using std::log;
    using std::pow;
    using std::sin;
    using std::sinh;
    using std::sqrt;
    const Node& n = nodes_[idx];
    switch (n.op) {
      case Op::Const: return S(n.value);
      case Op::Var: return x[n.var];
      case Op::Neg: return -eval_node<S>(n.a, x);
      case Op::Add: return eval_node<S>(n.a, x) + eval_node<S>(n.b, x);
      case Op::Sub: return eval_node<S>(n.a, x) - eval_node<S>(n.b, x);
      case Op::Mul: return eval_node<S>(n.a, x) * eval_node<S>(n.b, x);
      case Op::Div: return eval_node<S>(n.a, x) / eval_node<S>(n.b, x);
      case Op::Pow: {
        const Node& e = nodes_[n.b];
        if (e.op == Op::Const) return pow(eval_node<S>(n.a, x), e.value);
        return exp(eval_node<S>(n.b, x) * log(eval_node<S>(n.a, x)));
      }
      case Op::Sin: return sin(eval_node<S>(n.a, x));
      case Op::Cos: return cos(eval_node<S>(n.a, x));
      case Op::Exp: return exp(eval_node<S>(n.a, x));
      case Op::Sqrt: return sqrt(eval_node<S>(n.a, x));
      case Op::Log: return log(eval_node<S>(n.a, x));
      case Op::Sinh: return sinh(eval_node<S>(n.a, x));
      case Op::Cosh: return cosh(eval_node<S>(n.a, x));
    }
    return S(0.0);
  }

  friend class ExpressionParser;

  std::string text_;
  std::vector<Node> nodes_;
  int root_ = -1;
  int max_var_ = 0;
};

}  // namespace heatlocus
