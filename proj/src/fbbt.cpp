#include "ldsda/fbbt.hpp"

#include <algorithm>
#include <unordered_map>

#include "ldsda/errors.hpp"

namespace ldsda {

namespace {

// One HC4-style revise of a single constraint. Forward pass computes node
// enclosures; the backward pass pushes a target interval down through the
// invertible node kinds and intersects variable boxes in place.
class Revise {
 public:
  explicit Revise(BoundsBox& box) : box_(box) {}

  Interval forward(const Expr& e) {
    auto it = value_.find(e.raw());
    if (it != value_.end()) return it->second;
    Interval r;
    switch (e.kind()) {
      case Expr::Kind::kConstant: r = Interval::point(e.constant_value()); break;
      case Expr::Kind::kVar: r = box_[e.var_index()]; break;
      case Expr::Kind::kNeg: r = -forward(e.child(0)); break;
      case Expr::Kind::kExp: r = interval_exp(forward(e.child(0))); break;
      case Expr::Kind::kLn: r = interval_ln(forward(e.child(0))); break;
      case Expr::Kind::kAdd: r = forward(e.child(0)) + forward(e.child(1)); break;
      case Expr::Kind::kSub: r = forward(e.child(0)) - forward(e.child(1)); break;
      case Expr::Kind::kMul: r = forward(e.child(0)) * forward(e.child(1)); break;
      case Expr::Kind::kDiv: r = forward(e.child(0)) / forward(e.child(1)); break;
      case Expr::Kind::kIPow:
        r = interval_pow(forward(e.child(0)), e.ipow_exponent());
        break;
    }
    value_.emplace(e.raw(), r);
    return r;
  }

  // Returns false when some variable interval became empty.
  bool backward(const Expr& e, const Interval& target) {
    switch (e.kind()) {
      case Expr::Kind::kConstant:
        return !intersect(Interval::point(e.constant_value()), target).is_empty();
      case Expr::Kind::kVar: {
        Interval& b = box_[e.var_index()];
        b = intersect(b, target);
        return !b.is_empty();
      }
      case Expr::Kind::kNeg:
        return backward(e.child(0), -target);
      case Expr::Kind::kAdd: {
        const Interval va = value_.at(e.child(0).raw());
        const Interval vb = value_.at(e.child(1).raw());
        return backward(e.child(0), target - vb) &&
               backward(e.child(1), target - va);
      }
      case Expr::Kind::kSub: {
        const Interval va = value_.at(e.child(0).raw());
        const Interval vb = value_.at(e.child(1).raw());
        return backward(e.child(0), target + vb) &&
               backward(e.child(1), va - target);
      }
      case Expr::Kind::kMul: {
        const Interval va = value_.at(e.child(0).raw());
        const Interval vb = value_.at(e.child(1).raw());
        // target / v widens to entire when v straddles zero; harmless.
        return backward(e.child(0), target / vb) &&
               backward(e.child(1), target / va);
      }
      default:
        // exp/ln/div/pow: forward-only.
        return true;
    }
  }

 private:
  BoundsBox& box_;
  std::unordered_map<const Expr::Node*, Interval> value_;
};

}  // namespace

FbbtResult fbbt_tighten(const Nlp& nlp, const FbbtOptions& options) {
  if (options.slack < 0.0) throw InvalidParams("fbbt slack must be >= 0");
  BoundsBox box;
  box.reserve(nlp.variables.size());
  for (const Nlp::Variable& v : nlp.variables)
    box.push_back({v.lower, v.upper});

  const double s = options.slack;
  int pass = 0;
  for (; pass < options.max_iters; ++pass) {
    bool changed = false;
    auto snapshot = box;
    auto handle = [&](const Expr& body, bool equality) -> bool {
      Revise revise(box);
      const Interval enclosure = revise.forward(body);
      if (enclosure.is_empty()) return false;
      if (equality) {
        if (enclosure.lo > s || enclosure.hi < -s) return false;
      } else {
        if (enclosure.lo > s) return false;
      }
      const Interval target = equality
                                  ? Interval{-s, s}
                                  : Interval{-Interval::kInf, s};
      return revise.backward(body, target);
    };
    for (size_t i = 0; i < nlp.equalities.size(); ++i) {
      if (!handle(nlp.equalities[i], true))
        return ProvenInfeasible{nlp.equality_labels[i]};
    }
    for (size_t i = 0; i < nlp.inequalities.size(); ++i) {
      if (!handle(nlp.inequalities[i], false))
        return ProvenInfeasible{nlp.inequality_labels[i]};
    }
    for (size_t v = 0; v < box.size(); ++v) {
      if (box[v].lo != snapshot[v].lo || box[v].hi != snapshot[v].hi) {
        changed = true;
        break;
      }
    }
    if (!changed) {
      ++pass;
      break;
    }
  }
  return Tightened{std::move(box), std::min(pass, options.max_iters)};
}

}  // namespace ldsda
