#pragma once

#include <vector>

#include "ldsda/model.hpp"

namespace ldsda {

// Truth assignment indexed by Boolean id. Propagation is monotone: entries
// only move from Unknown to True/False.
using Assignment = std::vector<Truth>;

struct PropagateResult {
  enum class Outcome { kCompleted, kConflict, kResidual };
  Outcome outcome;
  Assignment assignment;
  int conflict_prop = -1;          // witness index into the prop list
  std::vector<int> undecided;      // Boolean ids still Unknown (kResidual)

  bool completed() const { return outcome == Outcome::kCompleted; }
  bool conflict() const { return outcome == Outcome::kConflict; }
};

// Fixpoint of clause-level unit propagation over the propositions compiled
// to clause form, plus counting rules for Exactly constraints. Does not
// search: if the fixpoint leaves Unknowns, the result is Residual.
PropagateResult propagate(const std::vector<Prop>& props, Assignment start);

// Evaluates every proposition under a complete assignment.
// Throws IncompleteAssignment if a referenced Boolean is Unknown.
bool check(const std::vector<Prop>& props, const Assignment& assignment);

}  // namespace ldsda
