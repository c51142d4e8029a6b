#include "ldsda/subproblem.hpp"

#include <unordered_map>
#include <unordered_set>

#include "ldsda/errors.hpp"

namespace ldsda {

std::vector<double> Nlp::default_start() const {
  std::vector<double> x(variables.size());
  for (size_t i = 0; i < variables.size(); ++i) x[i] = variables[i].initial;
  return x;
}

BuildResult build_subproblem(const Model& m,
                             const std::vector<ExternalVarSpec>& specs,
                             const ExternalPoint& z) {
  Assignment fixed = fix_booleans(specs, z, m.num_booleans());
  for (int b = 0; b < m.num_booleans(); ++b) {
    if (m.boolean(b).fixed.has_value())
      fixed[b] = *m.boolean(b).fixed ? Truth::kTrue : Truth::kFalse;
  }

  const std::vector<Prop> props = m.all_props();
  PropagateResult prop = propagate(props, std::move(fixed));
  if (prop.conflict()) {
    LogicallyInfeasible out;
    out.conflict_prop = prop.conflict_prop;
    out.witness = props[prop.conflict_prop].to_string([&] {
      std::vector<std::string> names;
      names.reserve(m.num_booleans());
      for (int b = 0; b < m.num_booleans(); ++b)
        names.push_back(m.boolean(b).name);
      return names;
    }());
    return out;
  }
  // Booleans outside every proposition and every spec have no effect on the
  // subproblem only if they also indicate no disjunct; indicators always
  // appear in the implicit Exactly, so Residual here means a real gap.
  if (!prop.completed()) {
    std::string names;
    for (int id : prop.undecided) {
      if (!names.empty()) names += ", ";
      names += m.boolean(id).name;
    }
    throw UnresolvedBooleans("propagation left Booleans undecided: " + names);
  }

  Nlp nlp;
  nlp.boolean_assignment = std::move(prop.assignment);
  nlp.variables.reserve(m.num_continuous());
  for (const ContinuousVar& v : m.continuous_vars()) {
    Nlp::Variable nv;
    nv.name = v.name;
    nv.lower = v.lower;
    nv.upper = v.upper;
    nv.initial = v.initial.value_or(0.5 * (v.lower + v.upper));
    nv.active = false;
    nlp.variables.push_back(nv);
  }

  auto add = [&nlp](const Constraint& c, ConstraintOrigin origin) {
    if (c.relation == Relation::kEqualZero) {
      nlp.equalities.push_back(c.body);
      nlp.equality_labels.push_back(c.label);
      nlp.equality_origins.push_back(origin);
    } else {
      nlp.inequalities.push_back(c.body);
      nlp.inequality_labels.push_back(c.label);
      nlp.inequality_origins.push_back(origin);
    }
  };

  const auto& globals = m.global_constraints();
  for (size_t i = 0; i < globals.size(); ++i) {
    ConstraintOrigin origin;
    origin.kind = ConstraintOrigin::Kind::kGlobal;
    origin.global_index = static_cast<int>(i);
    add(globals[i], origin);
  }
  const auto& disjunctions = m.disjunctions();
  for (size_t k = 0; k < disjunctions.size(); ++k) {
    if (disjunctions[k].removed) continue;
    const auto& disjuncts = disjunctions[k].disjuncts;
    for (size_t i = 0; i < disjuncts.size(); ++i) {
      if (nlp.boolean_assignment[disjuncts[i].indicator] != Truth::kTrue)
        continue;
      for (const Constraint& c : disjuncts[i].constraints) {
        ConstraintOrigin origin;
        origin.kind = ConstraintOrigin::Kind::kDisjunct;
        origin.disjunction = static_cast<int>(k);
        origin.disjunct = static_cast<int>(i);
        add(c, origin);
      }
    }
  }

  nlp.objective = m.objective();

  auto mark_active = [&nlp](const Expr& e) {
    // Walk the graph once; duplicates are cheap at this scale.
    std::vector<Expr> stack{e};
    std::unordered_set<const Expr::Node*> seen;
    while (!stack.empty()) {
      Expr cur = stack.back();
      stack.pop_back();
      if (!seen.insert(cur.raw()).second) continue;
      if (cur.kind() == Expr::Kind::kVar)
        nlp.variables[cur.var_index()].active = true;
      for (int c = 0; c < cur.num_children(); ++c) stack.push_back(cur.child(c));
    }
  };
  mark_active(nlp.objective);
  for (const Expr& e : nlp.equalities) mark_active(e);
  for (const Expr& e : nlp.inequalities) mark_active(e);

  return nlp;
}

ConstraintCounts count_constraints(const Nlp& nlp) {
  return {static_cast<int>(nlp.equalities.size()),
          static_cast<int>(nlp.inequalities.size())};
}

}  // namespace ldsda
