#pragma once

#include <string>
#include <variant>
#include <vector>

#include "ldsda/subproblem.hpp"

namespace ldsda {

// Per-variable interval box for a built subproblem.
using BoundsBox = std::vector<Interval>;

struct Tightened {
  BoundsBox box;
  int passes = 0;
};

struct ProvenInfeasible {
  std::string witness;  // label of the constraint whose enclosure is empty
};

using FbbtResult = std::variant<Tightened, ProvenInfeasible>;

struct FbbtOptions {
  double slack = 1e-7;  // keeps marginally feasible points alive
  int max_iters = 10;
};

// Forward-backward interval propagation over the subproblem constraints.
// Detects infeasible lattice points before any NLP solve; backward rules
// cover add/subtract/multiply/negate and variable nodes, everything else
// participates in forward passes only.
FbbtResult fbbt_tighten(const Nlp& nlp, const FbbtOptions& options = {});

}  // namespace ldsda
