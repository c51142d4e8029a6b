#include "ldsda/expr.hpp"

#include <cmath>
#include <sstream>
#include <unordered_map>

#include "ldsda/errors.hpp"

namespace ldsda {

struct Expr::Node {
  Kind kind;
  double value = 0.0;
  int var = -1;
  int exponent = 0;
  std::vector<Expr> children;
};

namespace {

Expr make(Expr::Kind kind, std::vector<Expr> children, double value = 0.0,
          int var = -1, int exponent = 0) {
  auto node = std::make_shared<Expr::Node>();
  node->kind = kind;
  node->value = value;
  node->var = var;
  node->exponent = exponent;
  node->children = std::move(children);
  struct Access : Expr {
    explicit Access(std::shared_ptr<const Node> n) : Expr(std::move(n)) {}
  };
  return Access(std::move(node));
}

}  // namespace

Expr Expr::constant(double value) {
  return make(Kind::kConstant, {}, value);
}

Expr Expr::var(int index) {
  if (index < 0) throw UnboundVariable("negative variable index");
  return make(Kind::kVar, {}, 0.0, index);
}

Expr operator+(const Expr& a, const Expr& b) { return make(Expr::Kind::kAdd, {a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return make(Expr::Kind::kSub, {a, b}); }
Expr operator*(const Expr& a, const Expr& b) { return make(Expr::Kind::kMul, {a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return make(Expr::Kind::kDiv, {a, b}); }
Expr operator-(const Expr& a) { return make(Expr::Kind::kNeg, {a}); }
Expr exp(const Expr& a) { return make(Expr::Kind::kExp, {a}); }
Expr ln(const Expr& a) { return make(Expr::Kind::kLn, {a}); }
Expr pow_int(const Expr& a, int exponent) {
  return make(Expr::Kind::kIPow, {a}, 0.0, -1, exponent);
}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::constant_value() const { return node_->value; }
int Expr::var_index() const { return node_->var; }
int Expr::ipow_exponent() const { return node_->exponent; }
int Expr::num_children() const { return static_cast<int>(node_->children.size()); }
const Expr& Expr::child(int i) const { return node_->children[i]; }

namespace {

// Post-order listing of unique nodes (children before parents).
void topo_order(const Expr& root, std::vector<Expr>& order,
                std::unordered_map<const Expr::Node*, int>& slot) {
  if (slot.count(root.raw())) return;
  // Iterative DFS; graphs from large models can be deep.
  std::vector<std::pair<Expr, int>> stack{{root, 0}};
  while (!stack.empty()) {
    auto& [e, next_child] = stack.back();
    if (slot.count(e.raw())) {
      stack.pop_back();
      continue;
    }
    if (next_child < e.num_children()) {
      Expr c = e.child(next_child++);
      if (!slot.count(c.raw())) stack.emplace_back(c, 0);
      continue;
    }
    slot.emplace(e.raw(), static_cast<int>(order.size()));
    order.push_back(e);
    stack.pop_back();
  }
}

}  // namespace

int Expr::max_var_index() const {
  std::vector<Expr> order;
  std::unordered_map<const Node*, int> slot;
  topo_order(*this, order, slot);
  int max_index = -1;
  for (const Expr& e : order) {
    if (e.kind() == Kind::kVar) max_index = std::max(max_index, e.var_index());
  }
  return max_index;
}

double Expr::eval(std::span<const double> point) const {
  std::vector<Expr> order;
  std::unordered_map<const Node*, int> slot;
  topo_order(*this, order, slot);
  std::vector<double> val(order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    const Expr& e = order[i];
    auto v = [&](int c) { return val[slot.at(e.child(c).raw())]; };
    switch (e.kind()) {
      case Kind::kConstant: val[i] = e.constant_value(); break;
      case Kind::kVar: {
        const int idx = e.var_index();
        if (idx >= static_cast<int>(point.size()))
          throw UnboundVariable("variable index " + std::to_string(idx) +
                                " not assigned");
        val[i] = point[idx];
        break;
      }
      case Kind::kNeg: val[i] = -v(0); break;
      case Kind::kExp: val[i] = std::exp(v(0)); break;
      case Kind::kLn:
        if (v(0) <= 0.0) throw DomainError("ln of nonpositive value");
        val[i] = std::log(v(0));
        break;
      case Kind::kAdd: val[i] = v(0) + v(1); break;
      case Kind::kSub: val[i] = v(0) - v(1); break;
      case Kind::kMul: val[i] = v(0) * v(1); break;
      case Kind::kDiv:
        if (v(1) == 0.0) throw DomainError("division by zero");
        val[i] = v(0) / v(1);
        break;
      case Kind::kIPow: val[i] = std::pow(v(0), e.ipow_exponent()); break;
    }
  }
  return val.back();
}

std::vector<double> Expr::gradient(std::span<const double> point) const {
  std::vector<Expr> order;
  std::unordered_map<const Node*, int> slot;
  topo_order(*this, order, slot);
  std::vector<double> val(order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    const Expr& e = order[i];
    auto v = [&](int c) { return val[slot.at(e.child(c).raw())]; };
    switch (e.kind()) {
      case Kind::kConstant: val[i] = e.constant_value(); break;
      case Kind::kVar: {
        const int idx = e.var_index();
        if (idx >= static_cast<int>(point.size()))
          throw UnboundVariable("variable index " + std::to_string(idx) +
                                " not assigned");
        val[i] = point[idx];
        break;
      }
      case Kind::kNeg: val[i] = -v(0); break;
      case Kind::kExp: val[i] = std::exp(v(0)); break;
      case Kind::kLn:
        if (v(0) <= 0.0) throw DomainError("ln of nonpositive value");
        val[i] = std::log(v(0));
        break;
      case Kind::kAdd: val[i] = v(0) + v(1); break;
      case Kind::kSub: val[i] = v(0) - v(1); break;
      case Kind::kMul: val[i] = v(0) * v(1); break;
      case Kind::kDiv:
        if (v(1) == 0.0) throw DomainError("division by zero");
        val[i] = v(0) / v(1);
        break;
      case Kind::kIPow: val[i] = std::pow(v(0), e.ipow_exponent()); break;
    }
  }

  std::vector<double> adj(order.size(), 0.0);
  adj.back() = 1.0;
  std::vector<double> grad(point.size(), 0.0);
  for (int i = static_cast<int>(order.size()) - 1; i >= 0; --i) {
    const Expr& e = order[i];
    const double a = adj[i];
    if (a == 0.0) continue;
    auto s = [&](int c) { return slot.at(e.child(c).raw()); };
    auto v = [&](int c) { return val[s(c)]; };
    switch (e.kind()) {
      case Kind::kConstant: break;
      case Kind::kVar: grad[e.var_index()] += a; break;
      case Kind::kNeg: adj[s(0)] -= a; break;
      case Kind::kExp: adj[s(0)] += a * val[i]; break;
      case Kind::kLn: adj[s(0)] += a / v(0); break;
      case Kind::kAdd:
        adj[s(0)] += a;
        adj[s(1)] += a;
        break;
      case Kind::kSub:
        adj[s(0)] += a;
        adj[s(1)] -= a;
        break;
      case Kind::kMul:
        adj[s(0)] += a * v(1);
        adj[s(1)] += a * v(0);
        break;
      case Kind::kDiv:
        adj[s(0)] += a / v(1);
        adj[s(1)] -= a * val[i] / v(1);
        break;
      case Kind::kIPow: {
        const int n = e.ipow_exponent();
        adj[s(0)] += a * n * std::pow(v(0), n - 1);
        break;
      }
    }
  }
  return grad;
}

Interval Expr::interval_eval(std::span<const Interval> box) const {
  std::vector<Expr> order;
  std::unordered_map<const Node*, int> slot;
  topo_order(*this, order, slot);
  std::vector<Interval> val(order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    const Expr& e = order[i];
    auto v = [&](int c) { return val[slot.at(e.child(c).raw())]; };
    switch (e.kind()) {
      case Kind::kConstant: val[i] = Interval::point(e.constant_value()); break;
      case Kind::kVar: {
        const int idx = e.var_index();
        if (idx >= static_cast<int>(box.size()))
          throw UnboundVariable("variable index " + std::to_string(idx) +
                                " has no interval");
        val[i] = box[idx];
        break;
      }
      case Kind::kNeg: val[i] = -v(0); break;
      case Kind::kExp: val[i] = interval_exp(v(0)); break;
      case Kind::kLn: val[i] = interval_ln(v(0)); break;
      case Kind::kAdd: val[i] = v(0) + v(1); break;
      case Kind::kSub: val[i] = v(0) - v(1); break;
      case Kind::kMul: val[i] = v(0) * v(1); break;
      case Kind::kDiv: val[i] = v(0) / v(1); break;
      case Kind::kIPow: val[i] = interval_pow(v(0), e.ipow_exponent()); break;
    }
  }
  return val.back();
}

std::string Expr::to_string() const {
  std::ostringstream out;
  switch (kind()) {
    case Kind::kConstant: out << constant_value(); break;
    case Kind::kVar: out << "x" << var_index(); break;
    case Kind::kNeg: out << "(-" << child(0).to_string() << ")"; break;
    case Kind::kExp: out << "exp(" << child(0).to_string() << ")"; break;
    case Kind::kLn: out << "ln(" << child(0).to_string() << ")"; break;
    case Kind::kAdd:
      out << "(" << child(0).to_string() << " + " << child(1).to_string() << ")";
      break;
    case Kind::kSub:
      out << "(" << child(0).to_string() << " - " << child(1).to_string() << ")";
      break;
    case Kind::kMul:
      out << "(" << child(0).to_string() << " * " << child(1).to_string() << ")";
      break;
    case Kind::kDiv:
      out << "(" << child(0).to_string() << " / " << child(1).to_string() << ")";
      break;
    case Kind::kIPow:
      out << "(" << child(0).to_string() << ")^" << ipow_exponent();
      break;
  }
  return out.str();
}

Tape::Tape(std::span<const Expr> outputs, int num_vars) : num_vars_(num_vars) {
  std::vector<Expr> order;
  std::unordered_map<const Expr::Node*, int> slot;
  for (const Expr& e : outputs) topo_order(e, order, slot);
  instrs_.reserve(order.size());
  for (const Expr& e : order) {
    Instr ins;
    ins.kind = e.kind();
    switch (e.kind()) {
      case Expr::Kind::kConstant: ins.value = e.constant_value(); break;
      case Expr::Kind::kVar:
        ins.var = e.var_index();
        if (ins.var >= num_vars)
          throw UnboundVariable("variable index " + std::to_string(ins.var) +
                                " exceeds tape width");
        break;
      case Expr::Kind::kIPow:
        ins.exponent = e.ipow_exponent();
        ins.a = slot.at(e.child(0).raw());
        break;
      case Expr::Kind::kNeg:
      case Expr::Kind::kExp:
      case Expr::Kind::kLn:
        ins.a = slot.at(e.child(0).raw());
        break;
      default:
        ins.a = slot.at(e.child(0).raw());
        ins.b = slot.at(e.child(1).raw());
        break;
    }
    instrs_.push_back(ins);
  }
  output_slots_.reserve(outputs.size());
  for (const Expr& e : outputs) output_slots_.push_back(slot.at(e.raw()));
  values_.resize(instrs_.size());
  adjoints_.resize(instrs_.size());
}

bool Tape::forward(std::span<const double> x) {
  bool ok = true;
  for (size_t i = 0; i < instrs_.size(); ++i) {
    const Instr& ins = instrs_[i];
    double r = 0.0;
    switch (ins.kind) {
      case Expr::Kind::kConstant: r = ins.value; break;
      case Expr::Kind::kVar: r = x[ins.var]; break;
      case Expr::Kind::kNeg: r = -values_[ins.a]; break;
      case Expr::Kind::kExp: r = std::exp(values_[ins.a]); break;
      case Expr::Kind::kLn:
        if (values_[ins.a] <= 0.0) ok = false;
        r = std::log(values_[ins.a]);
        break;
      case Expr::Kind::kAdd: r = values_[ins.a] + values_[ins.b]; break;
      case Expr::Kind::kSub: r = values_[ins.a] - values_[ins.b]; break;
      case Expr::Kind::kMul: r = values_[ins.a] * values_[ins.b]; break;
      case Expr::Kind::kDiv:
        if (values_[ins.b] == 0.0) ok = false;
        r = values_[ins.a] / values_[ins.b];
        break;
      case Expr::Kind::kIPow: r = std::pow(values_[ins.a], ins.exponent); break;
    }
    if (std::isnan(r)) ok = false;
    values_[i] = r;
  }
  return ok;
}

void Tape::reverse(std::span<const double> seeds, std::span<double> grad) const {
  std::fill(adjoints_.begin(), adjoints_.end(), 0.0);
  for (size_t k = 0; k < output_slots_.size(); ++k)
    adjoints_[output_slots_[k]] += seeds[k];
  std::fill(grad.begin(), grad.end(), 0.0);
  for (int i = static_cast<int>(instrs_.size()) - 1; i >= 0; --i) {
    const double a = adjoints_[i];
    if (a == 0.0) continue;
    const Instr& ins = instrs_[i];
    switch (ins.kind) {
      case Expr::Kind::kConstant: break;
      case Expr::Kind::kVar: grad[ins.var] += a; break;
      case Expr::Kind::kNeg: adjoints_[ins.a] -= a; break;
      case Expr::Kind::kExp: adjoints_[ins.a] += a * values_[i]; break;
      case Expr::Kind::kLn: adjoints_[ins.a] += a / values_[ins.a]; break;
      case Expr::Kind::kAdd:
        adjoints_[ins.a] += a;
        adjoints_[ins.b] += a;
        break;
      case Expr::Kind::kSub:
        adjoints_[ins.a] += a;
        adjoints_[ins.b] -= a;
        break;
      case Expr::Kind::kMul:
        adjoints_[ins.a] += a * values_[ins.b];
        adjoints_[ins.b] += a * values_[ins.a];
        break;
      case Expr::Kind::kDiv:
        adjoints_[ins.a] += a / values_[ins.b];
        adjoints_[ins.b] -= a * values_[i] / values_[ins.b];
        break;
      case Expr::Kind::kIPow:
        adjoints_[ins.a] +=
            a * ins.exponent * std::pow(values_[ins.a], ins.exponent - 1);
        break;
    }
  }
}

}  // namespace ldsda
