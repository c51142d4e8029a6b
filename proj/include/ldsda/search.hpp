#pragma once

#include <atomic>
#include <set>
#include <string>
#include <vector>

#include "ldsda/fbbt.hpp"
#include "ldsda/nlp.hpp"

namespace ldsda {

enum class NeighborhoodKind { kTwo, kInf };

enum class Phase { kInit, kNeighborhood, kLineSearch };

enum class PointStatus {
  kOptimal,
  kInfeasible,
  kSolverError,
  kLogicInfeasible,
  kFbbtInfeasible,
  kOutOfBox,
  kVisited,
};

enum class Certificate { kSLocal, kILocal, kBudgetExhausted };

struct SearchConfig {
  double epsilon = 0.0;  // relative improvement tolerance
  bool use_visited_set = true;
  bool use_domain_check = true;
  bool use_fbbt = true;
  bool use_warm_start = true;
  bool use_distance_tiebreak = true;
  long max_subproblem_solves = std::numeric_limits<long>::max();
  int threads = 1;  // >1 evaluates neighborhood subproblems concurrently
  FbbtOptions fbbt;
  SolverConfig nlp;
};

struct Evaluation {
  PointStatus status = PointStatus::kSolverError;
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> point;  // subproblem solution when optimal
};

// Lattice-point oracle behind the search: anything that can classify and
// solve s(z) for in-box points. Implementations must be safe to call from
// several threads at once.
class SubproblemEvaluator {
 public:
  virtual ~SubproblemEvaluator() = default;
  // Per-dimension upper bounds of the lattice box; lower bounds are all 1.
  virtual std::vector<int> box() const = 0;
  virtual Evaluation evaluate(const ExternalPoint& z,
                              const WarmStart* init) const = 0;
  virtual Assignment boolean_assignment(const ExternalPoint& /*z*/) const {
    return {};
  }
};

// Backs the search with a GDP model: fixes Booleans from z, propagates the
// logic, optionally runs FBBT, then calls the configured subsolver.
class GdpEvaluator : public SubproblemEvaluator {
 public:
  GdpEvaluator(const Model& model, std::vector<ExternalVarSpec> specs,
               const NlpSolver& solver, const SearchConfig& config);
  std::vector<int> box() const override;
  Evaluation evaluate(const ExternalPoint& z,
                      const WarmStart* init) const override;
  Assignment boolean_assignment(const ExternalPoint& z) const override;
  long nlp_solve_count() const { return nlp_solves_.load(); }

 private:
  const Model& model_;
  std::vector<ExternalVarSpec> specs_;
  const NlpSolver& solver_;
  bool use_fbbt_;
  FbbtOptions fbbt_;
  SolverConfig nlp_config_;
  mutable std::atomic<long> nlp_solves_{0};
};

// Fixed objective table over the lattice, for synthetic landscapes.
class TableEvaluator : public SubproblemEvaluator {
 public:
  TableEvaluator(std::vector<int> box, std::vector<double> values);
  static constexpr double kInfeasibleMark =
      std::numeric_limits<double>::infinity();
  std::vector<int> box() const override { return box_; }
  Evaluation evaluate(const ExternalPoint& z,
                      const WarmStart* init) const override;
  long index_of(const ExternalPoint& z) const;

 private:
  std::vector<int> box_;
  std::vector<double> values_;  // lexicographic layout, infinity = infeasible
};

struct TrajectoryEntry {
  ExternalPoint z;
  Phase phase = Phase::kInit;
  PointStatus status = PointStatus::kOptimal;
  double value = std::numeric_limits<double>::infinity();
  bool accepted = false;
};

struct SearchStats {
  long solves = 0;  // subsolver invocations (logic/FBBT/box skips excluded)
  long prunes_visited = 0;
  long prunes_domain = 0;
  long prunes_fbbt = 0;
  long prunes_logic = 0;
  long ns_rounds = 0;
  long ls_steps = 0;
  long accepted_moves = 0;
};

struct SearchResult {
  double best_value = std::numeric_limits<double>::infinity();
  ExternalPoint best_point;
  std::vector<double> variable_point;
  Assignment boolean_assignment;
  Certificate certificate = Certificate::kBudgetExhausted;
  SearchStats stats;
  std::vector<TrajectoryEntry> trajectory;
};

// Ordered direction set Delta_k: k=2 gives the 2n axial unit moves, k=inf
// every nonzero d in {-1,0,1}^n. Canonical order is lexicographic with
// -1 < 0 < 1, which pins down every tie-break in the search.
std::vector<std::vector<int>> neighbor_directions(int dims,
                                                  NeighborhoodKind k);

// The discrete steepest-descent loop: neighborhood search to pick the best
// improving direction, repeated line search along it, until the
// neighborhood certifies a discrete local optimum. Throws InfeasibleStart
// when s(z0) does not solve to Optimal.
SearchResult run_ldsda(const SubproblemEvaluator& evaluator,
                   const ExternalPoint& z0, NeighborhoodKind k,
                   const SearchConfig& config);

// Convenience overload wiring a GDP model through a GdpEvaluator.
SearchResult run_ldsda(const Model& model,
                   const std::vector<ExternalVarSpec>& specs,
                   const ExternalPoint& z0, NeighborhoodKind k,
                   const SearchConfig& config, const NlpSolver& solver);

struct LatticeRow {
  ExternalPoint z;
  PointStatus status = PointStatus::kOptimal;
  double value = std::numeric_limits<double>::infinity();
};

struct EnumerateResult {
  std::vector<LatticeRow> rows;  // lexicographic by z
  bool budget_exhausted = false;
  SearchStats stats;
};

EnumerateResult enumerate_lattice(const SubproblemEvaluator& evaluator,
                                  const SearchConfig& config);
EnumerateResult enumerate_lattice(const Model& model,
                                  const std::vector<ExternalVarSpec>& specs,
                                  const SearchConfig& config,
                                  const NlpSolver& solver);

// True iff no in-box neighbor in N_k(z) has a feasible subproblem strictly
// below f_sub(z) - max(0, epsilon * |f_sub(z)|).
bool verify_local(const SubproblemEvaluator& evaluator, const ExternalPoint& z,
                  NeighborhoodKind k, const SearchConfig& config);
bool verify_local(const Model& model,
                  const std::vector<ExternalVarSpec>& specs,
                  const ExternalPoint& z, NeighborhoodKind k,
                  const SearchConfig& config, const NlpSolver& solver);

std::string to_string(PointStatus status);
std::string to_string(Certificate certificate);
std::string to_string(Phase phase);

}  // namespace ldsda
