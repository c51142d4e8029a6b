#include "ldsda/search.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "ldsda/errors.hpp"

namespace ldsda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Guard from the improvement criterion's relative-change denominator.
constexpr double kRelGuard = 1e-10;

ExternalPoint shifted(const ExternalPoint& z, const std::vector<int>& d) {
  ExternalPoint out(z.size());
  for (size_t i = 0; i < z.size(); ++i) out[i] = z[i] + d[i];
  return out;
}

bool inside(const std::vector<int>& box, const ExternalPoint& z) {
  for (size_t i = 0; i < z.size(); ++i)
    if (z[i] < 1 || z[i] > box[i]) return false;
  return true;
}

double euclidean(const std::vector<int>& d) {
  double s = 0.0;
  for (int c : d) s += static_cast<double>(c) * c;
  return std::sqrt(s);
}

// Runs fn(i) for i in [0, n); with threads > 1 the order is arbitrary but
// every call writes only slot i, so results are order-independent.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::min(threads, n);
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

struct Engine {
  const SubproblemEvaluator& evaluator;
  const SearchConfig& cfg;
  std::vector<int> box;
  std::set<ExternalPoint> visited;
  SearchResult result;

  bool budget_left() const {
    return result.stats.solves < cfg.max_subproblem_solves;
  }

  void log(const ExternalPoint& z, Phase phase, PointStatus status,
           double value, bool accepted = false) {
    result.trajectory.push_back({z, phase, status, value, accepted});
  }

  void count_evaluation(PointStatus status) {
    switch (status) {
      case PointStatus::kOptimal:
      case PointStatus::kInfeasible:
      case PointStatus::kSolverError:
        ++result.stats.solves;
        break;
      case PointStatus::kLogicInfeasible: ++result.stats.prunes_logic; break;
      case PointStatus::kFbbtInfeasible: ++result.stats.prunes_fbbt; break;
      case PointStatus::kOutOfBox: ++result.stats.prunes_domain; break;
      case PointStatus::kVisited: ++result.stats.prunes_visited; break;
    }
  }

  bool strict_improvement(double incumbent, double candidate) const {
    return candidate < incumbent ||
           (incumbent - candidate) / (std::abs(incumbent) + kRelGuard) >
               cfg.epsilon;
  }

  bool nonstrict_improvement(double incumbent, double candidate) const {
    return candidate <= incumbent ||
           (incumbent - candidate) / (std::abs(incumbent) + kRelGuard) >=
               cfg.epsilon;
  }

  // One sweep over N_k(center). Every non-pruned neighbor is evaluated (in
  // parallel when configured); the selection rule then runs in canonical
  // order, so threaded and serial runs pick the same winner.
  struct NsOutcome {
    bool improved = false;
    bool truncated = false;  // ran out of solve budget mid-neighborhood
    ExternalPoint best;
    std::vector<int> direction;
    double value = kInf;
    std::vector<double> point;
  };

  NsOutcome neighborhood_search(const ExternalPoint& center, double f_star,
                                const std::vector<double>& gamma,
                                NeighborhoodKind k) {
    ++result.stats.ns_rounds;
    const auto dirs = neighbor_directions(static_cast<int>(center.size()), k);
    const int n = static_cast<int>(dirs.size());

    enum class Pre { kEvaluate, kVisited, kOutOfBox, kSkipBudget };
    std::vector<Pre> pre(n, Pre::kEvaluate);
    std::vector<ExternalPoint> alpha(n);
    for (int i = 0; i < n; ++i) {
      alpha[i] = shifted(center, dirs[i]);
      if (cfg.use_visited_set) {
        if (visited.count(alpha[i])) {
          pre[i] = Pre::kVisited;
          continue;
        }
        visited.insert(alpha[i]);
      }
      if (cfg.use_domain_check && !inside(box, alpha[i])) {
        pre[i] = Pre::kOutOfBox;
        continue;
      }
      if (!budget_left()) {
        pre[i] = Pre::kSkipBudget;
        continue;
      }
      ++result.stats.solves;  // reserve budget; refunded for non-solves below
    }

    const WarmStart warm{cfg.use_warm_start ? gamma : std::vector<double>{}};
    const WarmStart* init = warm.point.empty() ? nullptr : &warm;
    std::vector<Evaluation> evals(n);
    std::vector<int> todo;
    for (int i = 0; i < n; ++i)
      if (pre[i] == Pre::kEvaluate) todo.push_back(i);
    parallel_for(static_cast<int>(todo.size()), cfg.threads, [&](int t) {
      evals[todo[t]] = evaluator.evaluate(alpha[todo[t]], init);
    });

    NsOutcome out;
    out.value = f_star;
    double best_dist = 0.0;
    int winner_entry = -1;
    for (int i = 0; i < n; ++i) {
      switch (pre[i]) {
        case Pre::kVisited:
          ++result.stats.prunes_visited;
          log(alpha[i], Phase::kNeighborhood, PointStatus::kVisited, kInf);
          continue;
        case Pre::kOutOfBox:
          ++result.stats.prunes_domain;
          log(alpha[i], Phase::kNeighborhood, PointStatus::kOutOfBox, kInf);
          continue;
        case Pre::kSkipBudget:
          out.truncated = true;
          continue;
        case Pre::kEvaluate:
          break;
      }
      const Evaluation& ev = evals[i];
      --result.stats.solves;  // release the reservation, then count properly
      count_evaluation(ev.status);
      log(alpha[i], Phase::kNeighborhood, ev.status, ev.value);
      if (ev.status != PointStatus::kOptimal) continue;

      const double dist = euclidean(dirs[i]);
      bool take = false;
      if (!out.improved) {
        take = strict_improvement(out.value, ev.value);
      } else {
        take = nonstrict_improvement(out.value, ev.value);
        if (cfg.use_distance_tiebreak) {
          take = take && dist >= best_dist;
        } else {
          take = strict_improvement(out.value, ev.value);
        }
      }
      if (take) {
        out.improved = true;
        out.best = alpha[i];
        out.direction = dirs[i];
        out.value = ev.value;
        out.point = ev.point;
        best_dist = dist;
        winner_entry = static_cast<int>(result.trajectory.size()) - 1;
      }
    }
    if (winner_entry >= 0) result.trajectory[winner_entry].accepted = true;
    return out;
  }

  // One step along the steepest descent direction. Returns true when the
  // incumbent moved (caller loops).
  bool line_search(ExternalPoint& z, double& f_star, std::vector<double>& gamma,
                   const std::vector<int>& direction) {
    const ExternalPoint beta = shifted(z, direction);
    if (cfg.use_visited_set) {
      if (visited.count(beta)) {
        ++result.stats.prunes_visited;
        log(beta, Phase::kLineSearch, PointStatus::kVisited, kInf);
        return false;
      }
      visited.insert(beta);
    }
    if (cfg.use_domain_check && !inside(box, beta)) {
      ++result.stats.prunes_domain;
      log(beta, Phase::kLineSearch, PointStatus::kOutOfBox, kInf);
      return false;
    }
    if (!budget_left()) return false;
    const WarmStart warm{cfg.use_warm_start ? gamma : std::vector<double>{}};
    const Evaluation ev =
        evaluator.evaluate(beta, warm.point.empty() ? nullptr : &warm);
    count_evaluation(ev.status);
    ++result.stats.ls_steps;
    if (ev.status == PointStatus::kOptimal &&
        strict_improvement(f_star, ev.value)) {
      log(beta, Phase::kLineSearch, ev.status, ev.value, /*accepted=*/true);
      z = beta;
      f_star = ev.value;
      gamma = ev.point;
      ++result.stats.accepted_moves;
      return true;
    }
    log(beta, Phase::kLineSearch, ev.status, ev.value);
    return false;
  }
};

}  // namespace

std::vector<std::vector<int>> neighbor_directions(int dims,
                                                  NeighborhoodKind k) {
  std::vector<std::vector<int>> dirs;
  if (dims == 0) return dirs;
  if (k == NeighborhoodKind::kInf) {
    std::vector<int> d(dims, -1);
    while (true) {
      if (std::any_of(d.begin(), d.end(), [](int c) { return c != 0; }))
        dirs.push_back(d);
      int i = dims - 1;
      while (i >= 0 && d[i] == 1) d[i--] = -1;
      if (i < 0) break;
      ++d[i];
    }
  } else {
    for (int i = 0; i < dims; ++i) {
      for (int step : {-1, 1}) {
        std::vector<int> d(dims, 0);
        d[i] = step;
        dirs.push_back(d);
      }
    }
    std::sort(dirs.begin(), dirs.end());
  }
  return dirs;
}

SearchResult run_ldsda(const SubproblemEvaluator& evaluator,
                   const ExternalPoint& z0, NeighborhoodKind k,
                   const SearchConfig& config) {
  Engine engine{evaluator, config, evaluator.box(), {}, {}};
  if (z0.size() != engine.box.size() || !inside(engine.box, z0))
    throw OutOfBounds("starting point outside the lattice box");

  const Evaluation first = evaluator.evaluate(z0, nullptr);
  engine.count_evaluation(first.status);
  engine.log(z0, Phase::kInit, first.status, first.value, /*accepted=*/true);
  if (first.status != PointStatus::kOptimal)
    throw InfeasibleStart("subproblem at the starting point is not feasible");

  ExternalPoint z = z0;
  double f_star = first.value;
  std::vector<double> gamma = first.point;
  engine.visited.insert(z0);

  Certificate certificate =
      k == NeighborhoodKind::kInf ? Certificate::kILocal : Certificate::kSLocal;
  while (true) {
    if (!engine.budget_left()) {
      certificate = Certificate::kBudgetExhausted;
      break;
    }
    Engine::NsOutcome ns = engine.neighborhood_search(z, f_star, gamma, k);
    if (ns.improved) {
      z = ns.best;
      f_star = ns.value;
      gamma = ns.point;
      ++engine.result.stats.accepted_moves;
      while (engine.line_search(z, f_star, gamma, ns.direction)) {
      }
    }
    if (ns.truncated || !engine.budget_left()) {
      certificate = Certificate::kBudgetExhausted;
      break;
    }
    if (!ns.improved) break;
  }

  SearchResult out = std::move(engine.result);
  out.best_value = f_star;
  out.best_point = z;
  out.variable_point = std::move(gamma);
  out.boolean_assignment = evaluator.boolean_assignment(z);
  out.certificate = certificate;
  return out;
}

SearchResult run_ldsda(const Model& model,
                   const std::vector<ExternalVarSpec>& specs,
                   const ExternalPoint& z0, NeighborhoodKind k,
                   const SearchConfig& config, const NlpSolver& solver) {
  GdpEvaluator evaluator(model, specs, solver, config);
  return run_ldsda(evaluator, z0, k, config);
}

EnumerateResult enumerate_lattice(const SubproblemEvaluator& evaluator,
                                  const SearchConfig& config) {
  EnumerateResult out;
  const std::vector<int> box = evaluator.box();
  ExternalPoint z(box.size(), 1);
  // Walking the lattice in order, each point reuses the previous solution
  // as its starting guess (subproblems are dimension-stable); the sweep
  // stays deterministic because the order is fixed.
  WarmStart carry;
  bool done = false;
  while (!done) {
    if (out.stats.solves >= config.max_subproblem_solves) {
      out.budget_exhausted = true;
      break;
    }
    const WarmStart* init =
        config.use_warm_start && !carry.point.empty() ? &carry : nullptr;
    const Evaluation ev = evaluator.evaluate(z, init);
    switch (ev.status) {
      case PointStatus::kOptimal:
        ++out.stats.solves;
        carry.point = ev.point;
        break;
      case PointStatus::kInfeasible:
      case PointStatus::kSolverError:
        ++out.stats.solves;
        break;
      case PointStatus::kLogicInfeasible: ++out.stats.prunes_logic; break;
      case PointStatus::kFbbtInfeasible: ++out.stats.prunes_fbbt; break;
      default: break;
    }
    out.rows.push_back({z, ev.status, ev.value});
    if (z.empty()) break;
    int i = static_cast<int>(z.size()) - 1;
    while (i >= 0 && z[i] == box[i]) z[i--] = 1;
    if (i < 0) done = true;
    else ++z[i];
  }
  return out;
}

EnumerateResult enumerate_lattice(const Model& model,
                                  const std::vector<ExternalVarSpec>& specs,
                                  const SearchConfig& config,
                                  const NlpSolver& solver) {
  GdpEvaluator evaluator(model, specs, solver, config);
  return enumerate_lattice(evaluator, config);
}

bool verify_local(const SubproblemEvaluator& evaluator, const ExternalPoint& z,
                  NeighborhoodKind k, const SearchConfig& config) {
  const std::vector<int> box = evaluator.box();
  const Evaluation center = evaluator.evaluate(z, nullptr);
  if (center.status != PointStatus::kOptimal)
    throw InfeasibleStart("verify_local requires a feasible subproblem");
  const double cutoff =
      center.value - std::max(0.0, config.epsilon * std::abs(center.value));
  const WarmStart warm{config.use_warm_start ? center.point
                                             : std::vector<double>{}};
  const WarmStart* init = warm.point.empty() ? nullptr : &warm;
  for (const auto& d : neighbor_directions(static_cast<int>(z.size()), k)) {
    const ExternalPoint alpha = shifted(z, d);
    if (!inside(box, alpha)) continue;
    const Evaluation ev = evaluator.evaluate(alpha, init);
    if (ev.status == PointStatus::kOptimal && ev.value < cutoff) return false;
  }
  return true;
}

bool verify_local(const Model& model,
                  const std::vector<ExternalVarSpec>& specs,
                  const ExternalPoint& z, NeighborhoodKind k,
                  const SearchConfig& config, const NlpSolver& solver) {
  GdpEvaluator evaluator(model, specs, solver, config);
  return verify_local(evaluator, z, k, config);
}

GdpEvaluator::GdpEvaluator(const Model& model,
                           std::vector<ExternalVarSpec> specs,
                           const NlpSolver& solver, const SearchConfig& config)
    : model_(model),
      specs_(std::move(specs)),
      solver_(solver),
      use_fbbt_(config.use_fbbt),
      fbbt_(config.fbbt),
      nlp_config_(config.nlp) {}

std::vector<int> GdpEvaluator::box() const {
  std::vector<int> b;
  b.reserve(specs_.size());
  for (const ExternalVarSpec& s : specs_) b.push_back(s.upper());
  return b;
}

Evaluation GdpEvaluator::evaluate(const ExternalPoint& z,
                                  const WarmStart* init) const {
  Evaluation out;
  if (!in_box(specs_, z)) {
    out.status = PointStatus::kOutOfBox;
    return out;
  }
  BuildResult built = build_subproblem(model_, specs_, z);
  if (std::holds_alternative<LogicallyInfeasible>(built)) {
    out.status = PointStatus::kLogicInfeasible;
    return out;
  }
  const Nlp& nlp = std::get<Nlp>(built);
  if (use_fbbt_) {
    const FbbtResult fb = fbbt_tighten(nlp, fbbt_);
    if (std::holds_alternative<ProvenInfeasible>(fb)) {
      out.status = PointStatus::kFbbtInfeasible;
      return out;
    }
  }
  const WarmStart* usable =
      (init != nullptr &&
       static_cast<int>(init->point.size()) == nlp.num_vars())
          ? init
          : nullptr;
  nlp_solves_.fetch_add(1);
  const SubproblemResult sr = solver_.solve(nlp, usable, nlp_config_);
  switch (sr.status) {
    case SolveStatus::kOptimal:
      out.status = PointStatus::kOptimal;
      out.value = sr.objective;
      out.point = sr.point;
      break;
    case SolveStatus::kInfeasible: out.status = PointStatus::kInfeasible; break;
    case SolveStatus::kSolverError: out.status = PointStatus::kSolverError; break;
  }
  return out;
}

Assignment GdpEvaluator::boolean_assignment(const ExternalPoint& z) const {
  if (!in_box(specs_, z)) return {};
  BuildResult built = build_subproblem(model_, specs_, z);
  if (std::holds_alternative<LogicallyInfeasible>(built)) return {};
  return std::get<Nlp>(built).boolean_assignment;
}

TableEvaluator::TableEvaluator(std::vector<int> box, std::vector<double> values)
    : box_(std::move(box)), values_(std::move(values)) {
  long expect = 1;
  for (int b : box_) expect *= b;
  if (expect != static_cast<long>(values_.size()))
    throw DimensionMismatch("table size does not match lattice box");
}

long TableEvaluator::index_of(const ExternalPoint& z) const {
  long idx = 0;
  for (size_t i = 0; i < box_.size(); ++i) idx = idx * box_[i] + (z[i] - 1);
  return idx;
}

Evaluation TableEvaluator::evaluate(const ExternalPoint& z,
                                    const WarmStart*) const {
  Evaluation out;
  if (z.size() != box_.size() || !inside(box_, z)) {
    out.status = PointStatus::kOutOfBox;
    return out;
  }
  const double v = values_[index_of(z)];
  if (v == kInfeasibleMark) {
    out.status = PointStatus::kInfeasible;
    return out;
  }
  out.status = PointStatus::kOptimal;
  out.value = v;
  return out;
}

std::string to_string(PointStatus status) {
  switch (status) {
    case PointStatus::kOptimal: return "OPTIMAL";
    case PointStatus::kInfeasible: return "INFEASIBLE";
    case PointStatus::kSolverError: return "SOLVER_ERROR";
    case PointStatus::kLogicInfeasible: return "LOGIC_INFEASIBLE";
    case PointStatus::kFbbtInfeasible: return "FBBT_INFEASIBLE";
    case PointStatus::kOutOfBox: return "OUT_OF_BOX";
    case PointStatus::kVisited: return "VISITED";
  }
  return "UNKNOWN";
}

std::string to_string(Certificate certificate) {
  switch (certificate) {
    case Certificate::kSLocal: return "s-local";
    case Certificate::kILocal: return "i-local";
    case Certificate::kBudgetExhausted: return "budget-exhausted";
  }
  return "unknown";
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::kInit: return "INIT";
    case Phase::kNeighborhood: return "NS";
    case Phase::kLineSearch: return "LS";
  }
  return "UNKNOWN";
}

}  // namespace ldsda
