#pragma once

#include <memory>
#include <span>

#include "ldsda/subproblem.hpp"

namespace ldsda {

struct SolverConfig {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-6;   // KKT residual target
  int max_outer = 50;
  int max_inner = 200;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  double penalty_cap = 1e10;
  // Single deterministic fallback from the default start when a caller-given
  // warm start does not reach Optimal.
  bool midpoint_fallback = true;
};

// Full-dimension variable vector carried between lattice points.
struct WarmStart {
  std::vector<double> point;
};

// Pluggable local subsolver interface. Anything returning a
// SubproblemResult for (Nlp, init, config) can replace the built-in.
class NlpSolver {
 public:
  virtual ~NlpSolver() = default;
  virtual SubproblemResult solve(const Nlp& nlp, const WarmStart* init,
                                 const SolverConfig& config) const = 0;
};

// Built-in local method: a primal barrier interior-point iteration with
// slacks for the inequalities, Newton steps on the regularized KKT system
// (Hessians come from central differences of gradient sweeps), and a
// Levenberg-Marquardt feasibility phase that doubles as the local
// infeasibility detector. Deterministic: fixed iteration order, no
// randomized restarts.
class InteriorPointSolver : public NlpSolver {
 public:
  SubproblemResult solve(const Nlp& nlp, const WarmStart* init,
                         const SolverConfig& config) const override;
};

// Independent optimality measure: max of the projected stationarity norm,
// complementarity, and primal violation at (point, multipliers).
double kkt_residual(const Nlp& nlp, std::span<const double> point,
                    std::span<const double> equality_multipliers,
                    std::span<const double> inequality_multipliers);

double max_constraint_violation(const Nlp& nlp, std::span<const double> point);

}  // namespace ldsda
