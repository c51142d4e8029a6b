#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "ldsda/reformulate.hpp"

namespace ldsda {

// Where a subproblem constraint came from, for reduction tests and reports.
struct ConstraintOrigin {
  enum class Kind { kGlobal, kDisjunct };
  Kind kind = Kind::kGlobal;
  int global_index = -1;
  int disjunction = -1;
  int disjunct = -1;
};

// The reduced fixed subproblem s(z_E): a pure NLP over every continuous
// variable of the model (dimension-stable across lattice points, so warm
// start vectors carry over), with only the constraints of True disjuncts
// plus the global constraints.
struct Nlp {
  struct Variable {
    std::string name;
    double lower = 0.0;
    double upper = 0.0;
    double initial = 0.0;  // declared initial value, else bound midpoint
    bool active = true;    // appears in an included constraint or objective
  };
  std::vector<Variable> variables;
  std::vector<Expr> equalities;       // body == 0
  std::vector<Expr> inequalities;     // body <= 0
  std::vector<std::string> equality_labels;
  std::vector<std::string> inequality_labels;
  std::vector<ConstraintOrigin> equality_origins;
  std::vector<ConstraintOrigin> inequality_origins;
  Expr objective;
  Assignment boolean_assignment;  // complete assignment behind this build

  int num_vars() const { return static_cast<int>(variables.size()); }
  std::vector<double> default_start() const;
};

struct LogicallyInfeasible {
  int conflict_prop = -1;
  std::string witness;
};

using BuildResult = std::variant<Nlp, LogicallyInfeasible>;

// Fixes Y_R from z, completes Y_N by propagation, and keeps only the
// constraints of True disjuncts. Throws UnresolvedBooleans when propagation
// leaves Booleans undecided (the reduced problem would not be an NLP).
BuildResult build_subproblem(const Model& m,
                             const std::vector<ExternalVarSpec>& specs,
                             const ExternalPoint& z);

struct ConstraintCounts {
  int equalities = 0;
  int inequalities = 0;
};

ConstraintCounts count_constraints(const Nlp& nlp);

enum class SolveStatus { kOptimal, kInfeasible, kSolverError };

struct SubproblemResult {
  SolveStatus status = SolveStatus::kSolverError;
  double objective = std::numeric_limits<double>::infinity();  // +inf unless Optimal
  std::vector<double> point;
  std::vector<double> equality_multipliers;
  std::vector<double> inequality_multipliers;
  int iterations = 0;
};

}  // namespace ldsda
