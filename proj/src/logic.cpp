#include "ldsda/logic.hpp"

#include <algorithm>

#include "ldsda/errors.hpp"

namespace ldsda {

namespace {

struct Literal {
  int var;
  bool negated;
};

struct Clause {
  std::vector<Literal> lits;
  int source;  // prop index, for conflict witnesses
};

struct Counter {
  int count;
  std::vector<int> vars;
  int source;
};

// Formula in negation normal form, used only during clause compilation.
struct Formula {
  enum class Kind { kLit, kAnd, kOr };
  Kind kind = Kind::kLit;
  Literal lit{-1, false};
  std::vector<Formula> parts;

  static Formula literal(int var, bool negated) {
    Formula f;
    f.kind = Kind::kLit;
    f.lit = {var, negated};
    return f;
  }
  static Formula conj(std::vector<Formula> parts) {
    Formula f;
    f.kind = Kind::kAnd;
    f.parts = std::move(parts);
    return f;
  }
  static Formula disj(std::vector<Formula> parts) {
    Formula f;
    f.kind = Kind::kOr;
    f.parts = std::move(parts);
    return f;
  }
};

// Clause expansion of Exactly(m, ids): every (m+1)-subset contains a False,
// every (n-m+1)-subset contains a True. Used when an Exactly occurs nested
// inside another connective; top-level Exactly stays a counting constraint.
Formula exactly_formula(int m, const std::vector<int>& ids) {
  const int n = static_cast<int>(ids.size());
  std::vector<Formula> clauses;
  auto subsets = [&](int size, bool negated) {
    std::vector<int> pick(size);
    // Iterative enumeration of all `size`-subsets in lexicographic order.
    for (int i = 0; i < size; ++i) pick[i] = i;
    while (true) {
      std::vector<Formula> lits;
      lits.reserve(size);
      for (int i : pick) lits.push_back(Formula::literal(ids[i], negated));
      clauses.push_back(Formula::disj(std::move(lits)));
      int k = size - 1;
      while (k >= 0 && pick[k] == n - size + k) --k;
      if (k < 0) break;
      ++pick[k];
      for (int i = k + 1; i < size; ++i) pick[i] = pick[i - 1] + 1;
    }
  };
  if (m + 1 <= n) subsets(m + 1, /*negated=*/true);
  if (n - m + 1 >= 1 && n - m + 1 <= n) subsets(n - m + 1, /*negated=*/false);
  return Formula::conj(std::move(clauses));
}

Formula to_nnf(const Prop& p, bool negated) {
  switch (p.kind()) {
    case Prop::Kind::kLit:
      return Formula::literal(p.boolean_id(), negated);
    case Prop::Kind::kNot:
      return to_nnf(p.parts()[0], !negated);
    case Prop::Kind::kAnd: {
      std::vector<Formula> parts;
      for (const Prop& q : p.parts()) parts.push_back(to_nnf(q, negated));
      return negated ? Formula::disj(std::move(parts))
                     : Formula::conj(std::move(parts));
    }
    case Prop::Kind::kOr: {
      std::vector<Formula> parts;
      for (const Prop& q : p.parts()) parts.push_back(to_nnf(q, negated));
      return negated ? Formula::conj(std::move(parts))
                     : Formula::disj(std::move(parts));
    }
    case Prop::Kind::kXor: {
      // Fold pairwise: xor(a, b) = (a | b) & (!a | !b).
      const auto& parts = p.parts();
      if (parts.empty()) {
        // Empty xor is False; negated it is True (empty conjunction).
        return negated ? Formula::conj({}) : Formula::disj({});
      }
      Prop acc = parts[0];
      for (size_t i = 1; i < parts.size(); ++i) {
        Prop a = acc;
        Prop b = parts[i];
        acc = Prop::conjunction(
            {Prop::disjunction({a, b}),
             Prop::disjunction({Prop::negate(a), Prop::negate(b)})});
      }
      return to_nnf(acc, negated);
    }
    case Prop::Kind::kImplies: {
      const Prop equivalent = Prop::disjunction(
          {Prop::negate(p.parts()[0]), p.parts()[1]});
      return to_nnf(equivalent, negated);
    }
    case Prop::Kind::kIff: {
      const Prop a = p.parts()[0];
      const Prop b = p.parts()[1];
      const Prop equivalent = Prop::conjunction(
          {Prop::disjunction({Prop::negate(a), b}),
           Prop::disjunction({a, Prop::negate(b)})});
      return to_nnf(equivalent, negated);
    }
    case Prop::Kind::kExactly: {
      const Formula f = exactly_formula(p.exactly_count(), p.exactly_ids());
      if (!negated) return f;
      // Negate the clause form: NNF by De Morgan over the And-of-Ors.
      std::vector<Formula> ors;
      for (const Formula& clause : f.parts) {
        std::vector<Formula> ands;
        for (const Formula& lit : clause.parts)
          ands.push_back(Formula::literal(lit.lit.var, !lit.lit.negated));
        ors.push_back(Formula::conj(std::move(ands)));
      }
      return Formula::disj(std::move(ors));
    }
  }
  throw Error("unreachable proposition kind");
}

// CNF by distribution. Fine at this problem scale; no auxiliary variables.
void to_clauses(const Formula& f, int source, std::vector<Clause>& out) {
  switch (f.kind) {
    case Formula::Kind::kLit:
      out.push_back({{f.lit}, source});
      return;
    case Formula::Kind::kAnd:
      for (const Formula& part : f.parts) to_clauses(part, source, out);
      return;
    case Formula::Kind::kOr: {
      // Distribute: cross product of the children's clause sets.
      std::vector<std::vector<Literal>> acc{{}};
      for (const Formula& part : f.parts) {
        std::vector<Clause> sub;
        to_clauses(part, source, sub);
        std::vector<std::vector<Literal>> next;
        next.reserve(acc.size() * sub.size());
        for (const auto& base : acc) {
          for (const Clause& c : sub) {
            std::vector<Literal> merged = base;
            merged.insert(merged.end(), c.lits.begin(), c.lits.end());
            next.push_back(std::move(merged));
          }
        }
        acc = std::move(next);
      }
      for (auto& lits : acc) out.push_back({std::move(lits), source});
      return;
    }
  }
}

struct Compiled {
  std::vector<Clause> clauses;
  std::vector<Counter> counters;
};

Compiled compile(const std::vector<Prop>& props) {
  Compiled out;
  for (size_t i = 0; i < props.size(); ++i) {
    const Prop& p = props[i];
    const int source = static_cast<int>(i);
    // Split a top-level conjunction so top-level Exactly parts stay counters.
    std::vector<const Prop*> conjuncts;
    if (p.kind() == Prop::Kind::kAnd) {
      for (const Prop& q : p.parts()) conjuncts.push_back(&q);
    } else {
      conjuncts.push_back(&p);
    }
    for (const Prop* q : conjuncts) {
      if (q->kind() == Prop::Kind::kExactly) {
        out.counters.push_back({q->exactly_count(), q->exactly_ids(), source});
      } else {
        to_clauses(to_nnf(*q, false), source, out.clauses);
      }
    }
  }
  return out;
}

Truth lit_value(const Assignment& a, const Literal& l) {
  const Truth t = a[l.var];
  if (t == Truth::kUnknown) return Truth::kUnknown;
  const bool v = (t == Truth::kTrue);
  return (v != l.negated) ? Truth::kTrue : Truth::kFalse;
}

}  // namespace

PropagateResult propagate(const std::vector<Prop>& props, Assignment start) {
  int max_id = static_cast<int>(start.size()) - 1;
  for (const Prop& p : props) max_id = std::max(max_id, p.max_boolean_id());
  start.resize(max_id + 1, Truth::kUnknown);

  const Compiled compiled = compile(props);
  PropagateResult result;
  result.assignment = std::move(start);
  Assignment& a = result.assignment;

  auto assign = [&](int var, bool value) {
    a[var] = value ? Truth::kTrue : Truth::kFalse;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (const Clause& c : compiled.clauses) {
      int unknown_count = 0;
      const Literal* unit = nullptr;
      bool satisfied = false;
      for (const Literal& l : c.lits) {
        switch (lit_value(a, l)) {
          case Truth::kTrue: satisfied = true; break;
          case Truth::kUnknown:
            ++unknown_count;
            unit = &l;
            break;
          case Truth::kFalse: break;
        }
        if (satisfied) break;
      }
      if (satisfied) continue;
      if (unknown_count == 0) {
        result.outcome = PropagateResult::Outcome::kConflict;
        result.conflict_prop = c.source;
        return result;
      }
      if (unknown_count == 1) {
        assign(unit->var, !unit->negated);
        changed = true;
      }
    }
    for (const Counter& c : compiled.counters) {
      int trues = 0, unknowns = 0;
      for (int v : c.vars) {
        if (a[v] == Truth::kTrue) ++trues;
        else if (a[v] == Truth::kUnknown) ++unknowns;
      }
      if (trues > c.count || trues + unknowns < c.count) {
        result.outcome = PropagateResult::Outcome::kConflict;
        result.conflict_prop = c.source;
        return result;
      }
      if (unknowns == 0) continue;
      if (trues == c.count) {
        for (int v : c.vars)
          if (a[v] == Truth::kUnknown) assign(v, false);
        changed = true;
      } else if (trues + unknowns == c.count) {
        for (int v : c.vars)
          if (a[v] == Truth::kUnknown) assign(v, true);
        changed = true;
      }
    }
  }

  for (size_t v = 0; v < a.size(); ++v)
    if (a[v] == Truth::kUnknown) result.undecided.push_back(static_cast<int>(v));
  result.outcome = result.undecided.empty()
                       ? PropagateResult::Outcome::kCompleted
                       : PropagateResult::Outcome::kResidual;
  return result;
}

namespace {

bool eval_prop(const Prop& p, const Assignment& a) {
  switch (p.kind()) {
    case Prop::Kind::kLit: {
      const int id = p.boolean_id();
      if (id >= static_cast<int>(a.size()) || a[id] == Truth::kUnknown)
        throw IncompleteAssignment("Boolean " + std::to_string(id) +
                                   " is unassigned");
      return a[id] == Truth::kTrue;
    }
    case Prop::Kind::kNot:
      return !eval_prop(p.parts()[0], a);
    case Prop::Kind::kAnd:
      for (const Prop& q : p.parts())
        if (!eval_prop(q, a)) return false;
      return true;
    case Prop::Kind::kOr:
      for (const Prop& q : p.parts())
        if (eval_prop(q, a)) return true;
      return false;
    case Prop::Kind::kXor: {
      bool acc = false;
      for (const Prop& q : p.parts()) acc = acc != eval_prop(q, a);
      return acc;
    }
    case Prop::Kind::kImplies:
      return !eval_prop(p.parts()[0], a) || eval_prop(p.parts()[1], a);
    case Prop::Kind::kIff:
      return eval_prop(p.parts()[0], a) == eval_prop(p.parts()[1], a);
    case Prop::Kind::kExactly: {
      int trues = 0;
      for (int v : p.exactly_ids()) {
        if (v >= static_cast<int>(a.size()) || a[v] == Truth::kUnknown)
          throw IncompleteAssignment("Boolean " + std::to_string(v) +
                                     " is unassigned");
        if (a[v] == Truth::kTrue) ++trues;
      }
      return trues == p.exactly_count();
    }
  }
  throw Error("unreachable proposition kind");
}

}  // namespace

bool check(const std::vector<Prop>& props, const Assignment& assignment) {
  for (const Prop& p : props)
    if (!eval_prop(p, assignment)) return false;
  return true;
}

}  // namespace ldsda
