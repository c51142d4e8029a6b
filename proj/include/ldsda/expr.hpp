#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ldsda/interval.hpp"

namespace ldsda {

// Immutable expression graph over real constants and variable references.
// Nodes are shared, so common subexpressions are evaluated once per sweep.
// Supported atoms keep derivative and interval rules simple: the general
// power x^y is written as exp(y * ln(x)) by the caller.
class Expr {
 public:
  enum class Kind {
    kConstant,
    kVar,
    kNeg,
    kExp,
    kLn,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kIPow,  // integer exponent stored on the node
  };

  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double value);
  static Expr var(int index);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr operator+(const Expr& a, double b) { return a + constant(b); }
  friend Expr operator+(double a, const Expr& b) { return constant(a) + b; }
  friend Expr operator-(const Expr& a, double b) { return a - constant(b); }
  friend Expr operator-(double a, const Expr& b) { return constant(a) - b; }
  friend Expr operator*(const Expr& a, double b) { return a * constant(b); }
  friend Expr operator*(double a, const Expr& b) { return constant(a) * b; }
  friend Expr operator/(const Expr& a, double b) { return a / constant(b); }
  friend Expr operator/(double a, const Expr& b) { return constant(a) / b; }

  friend Expr exp(const Expr& a);
  friend Expr ln(const Expr& a);
  friend Expr pow_int(const Expr& a, int exponent);

  Kind kind() const;
  double constant_value() const;
  int var_index() const;
  int ipow_exponent() const;
  int num_children() const;
  const Expr& child(int i) const;

  // Largest variable index referenced, or -1 for a variable-free expression.
  int max_var_index() const;

  // Exact arithmetic evaluation. Throws DomainError on ln(<=0) or division
  // by zero, UnboundVariable when a referenced index is outside `point`.
  double eval(std::span<const double> point) const;

  // Reverse-mode first derivatives with respect to every entry of `point`.
  std::vector<double> gradient(std::span<const double> point) const;

  // Natural interval extension over a per-variable box.
  Interval interval_eval(std::span<const Interval> box) const;

  std::string to_string() const;

  bool same_node(const Expr& o) const { return node_ == o.node_; }

  struct Node;
  const Node* raw() const { return node_.get(); }

 protected:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<const Node> node_;
};

// A compiled straight-line program for one or more expressions sharing a
// DAG. One forward sweep evaluates every output; one reverse sweep with
// per-output adjoint seeds accumulates the gradient of any weighted sum of
// outputs. This is what the NLP solver iterates on.
class Tape {
 public:
  Tape(std::span<const Expr> outputs, int num_vars);

  int num_outputs() const { return static_cast<int>(output_slots_.size()); }
  int num_vars() const { return num_vars_; }

  // Returns false (instead of throwing) when the sweep hits a domain
  // violation; outputs are then unusable.
  bool forward(std::span<const double> x);
  double output(int k) const { return values_[output_slots_[k]]; }

  // d/dx of sum_k seeds[k] * output_k at the last forward point.
  // Requires a successful forward() first.
  void reverse(std::span<const double> seeds, std::span<double> grad) const;

 private:
  struct Instr {
    Expr::Kind kind;
    int a = -1;     // child slots
    int b = -1;
    double value = 0.0;  // constant payload
    int var = -1;        // variable index
    int exponent = 0;    // integer power
  };
  int num_vars_;
  std::vector<Instr> instrs_;
  std::vector<int> output_slots_;
  std::vector<double> values_;
  mutable std::vector<double> adjoints_;
};

}  // namespace ldsda
