#include "ldsda/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "ldsda/errors.hpp"

namespace ldsda {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Program {
  // Tape outputs: [objective, equalities..., inequalities...].
  Tape tape;
  int num_eq;
  int num_ineq;

  explicit Program(const Nlp& nlp)
      : tape(
            [&nlp] {
              std::vector<Expr> outputs;
              outputs.reserve(1 + nlp.equalities.size() +
                              nlp.inequalities.size());
              outputs.push_back(nlp.objective);
              outputs.insert(outputs.end(), nlp.equalities.begin(),
                             nlp.equalities.end());
              outputs.insert(outputs.end(), nlp.inequalities.begin(),
                             nlp.inequalities.end());
              return outputs;
            }(),
            nlp.num_vars()),
        num_eq(static_cast<int>(nlp.equalities.size())),
        num_ineq(static_cast<int>(nlp.inequalities.size())) {}

  bool forward(std::span<const double> x) { return tape.forward(x); }
  double objective() const { return tape.output(0); }
  double eq(int i) const { return tape.output(1 + i); }
  double ineq(int j) const { return tape.output(1 + num_eq + j); }
};

void project(const Nlp& nlp, std::vector<double>& x) {
  for (int i = 0; i < nlp.num_vars(); ++i)
    x[i] = std::clamp(x[i], nlp.variables[i].lower, nlp.variables[i].upper);
}

// Dense Cholesky solve of (A + nu I) x = b; returns false when the factor
// breaks down even with the ridge.
bool solve_spd(std::vector<double> a, int n, double nu, std::vector<double> b,
               std::vector<double>& x) {
  for (int i = 0; i < n; ++i) a[i * n + i] += nu;
  for (int j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (int k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    if (diag <= 0.0) return false;
    const double root = std::sqrt(diag);
    a[j * n + j] = root;
    for (int i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (int k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / root;
    }
  }
  for (int i = 0; i < n; ++i) {
    double v = b[i];
    for (int k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
    b[i] = v / a[i * n + i];
  }
  x.assign(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double v = b[i];
    for (int k = i + 1; k < n; ++k) v -= a[k * n + i] * x[k];
    x[i] = v / a[i * n + i];
  }
  return true;
}

// Levenberg-Marquardt descent on half the squared norm of the violated
// constraints (first derivatives only). Used to find a feasible starting
// point and as the local-infeasibility detector.
struct RestoreOutcome {
  double violation = 0.0;
  bool stalled = false;  // first-order stationary for the residual norm
};

RestoreOutcome restore_feasibility(Program& prog, const Nlp& nlp,
                                   std::vector<double>& x, double target,
                                   int max_iter) {
  const int n = nlp.num_vars();
  const int m_eq = prog.num_eq;
  const int m = m_eq + prog.num_ineq;
  RestoreOutcome out;
  if (m == 0 || n == 0) {
    prog.forward(x);
    return out;
  }
  std::vector<double> residual(m), jac(static_cast<size_t>(m) * n);
  std::vector<double> seeds(1 + m, 0.0), row(n);
  double nu = 1e-4;

  auto load = [&](const std::vector<double>& point, double& merit,
                  double& viol) -> bool {
    if (!prog.forward(point)) return false;
    merit = 0.0;
    viol = 0.0;
    for (int i = 0; i < m_eq; ++i) {
      residual[i] = prog.eq(i);
      merit += residual[i] * residual[i];
      viol = std::max(viol, std::abs(residual[i]));
    }
    for (int j = 0; j < prog.num_ineq; ++j) {
      residual[m_eq + j] = std::max(0.0, prog.ineq(j));
      merit += residual[m_eq + j] * residual[m_eq + j];
      viol = std::max(viol, residual[m_eq + j]);
    }
    merit *= 0.5;
    return true;
  };

  double merit = 0.0;
  if (!load(x, merit, out.violation)) {
    out.stalled = true;
    return out;
  }
  std::vector<double> trial(n), a(static_cast<size_t>(n) * n), b(n), delta(n);
  std::vector<bool> free_coord(n);
  for (int it = 0; it < max_iter; ++it) {
    if (out.violation <= target) break;
    // Tape back to x (a rejected trial may have left it elsewhere).
    load(x, merit, out.violation);
    for (int r = 0; r < m; ++r) {
      const bool active = r < m_eq || residual[r] > 0.0;
      if (!active) {
        std::fill(jac.begin() + static_cast<size_t>(r) * n,
                  jac.begin() + static_cast<size_t>(r + 1) * n, 0.0);
        continue;
      }
      std::fill(seeds.begin(), seeds.end(), 0.0);
      seeds[1 + r] = 1.0;
      prog.tape.reverse(seeds, row);
      std::copy(row.begin(), row.end(),
                jac.begin() + static_cast<size_t>(r) * n);
    }
    // Gradient of the merit and the free-coordinate mask: a variable pinned
    // at a bound with the gradient pushing outward leaves the normal
    // equations entirely, so clipping cannot corrupt the LM direction.
    std::fill(b.begin(), b.end(), 0.0);
    for (int r = 0; r < m; ++r) {
      const double* jr = &jac[static_cast<size_t>(r) * n];
      for (int i = 0; i < n; ++i) b[i] -= jr[i] * residual[r];
    }
    double grad_norm = 0.0;
    for (int i = 0; i < n; ++i) {
      const bool at_lower =
          x[i] <= nlp.variables[i].lower + 1e-14 && b[i] < 0.0;
      const bool at_upper =
          x[i] >= nlp.variables[i].upper - 1e-14 && b[i] > 0.0;
      free_coord[i] = !(at_lower || at_upper);
      if (!free_coord[i]) b[i] = 0.0;
      grad_norm = std::max(grad_norm, std::abs(b[i]));
    }
    if (grad_norm <= 1e-12 * std::max(1.0, merit)) {
      out.stalled = true;
      break;
    }
    std::fill(a.begin(), a.end(), 0.0);
    for (int r = 0; r < m; ++r) {
      const double* jr = &jac[static_cast<size_t>(r) * n];
      for (int i = 0; i < n; ++i) {
        if (jr[i] == 0.0 || !free_coord[i]) continue;
        for (int k = 0; k <= i; ++k)
          if (free_coord[k]) a[i * n + k] += jr[i] * jr[k];
      }
    }
    for (int i = 0; i < n; ++i) {
      if (!free_coord[i]) a[i * n + i] = 1.0;
      for (int k = i + 1; k < n; ++k) a[i * n + k] = a[k * n + i];
    }

    auto try_step = [&](const std::vector<double>& dir, int halvings) {
      double t = 1.0;
      for (int h = 0; h < halvings; ++h) {
        for (int i = 0; i < n; ++i)
          trial[i] = std::clamp(x[i] + t * dir[i], nlp.variables[i].lower,
                                nlp.variables[i].upper);
        double trial_merit = 0.0, trial_viol = 0.0;
        if (load(trial, trial_merit, trial_viol) &&
            trial_merit < merit * (1.0 - 1e-14)) {
          x = trial;
          merit = trial_merit;
          out.violation = trial_viol;
          return true;
        }
        t *= 0.5;
      }
      return false;
    };

    bool moved = false;
    for (int attempt = 0; attempt < 10 && !moved; ++attempt) {
      if (!solve_spd(a, n, nu, b, delta)) {
        nu = std::max(nu * 10.0, 1e-8);
        continue;
      }
      for (int i = 0; i < n; ++i)
        if (!free_coord[i]) delta[i] = 0.0;
      if (try_step(delta, 4)) {
        moved = true;
        nu = std::max(nu / 3.0, 1e-12);
      } else {
        nu *= 4.0;
      }
    }
    if (!moved) {
      // Projected steepest descent on the merit; scale to a sane first try.
      double jtj_scale = 1e-12;
      for (int i = 0; i < n; ++i) jtj_scale = std::max(jtj_scale, a[i * n + i]);
      std::vector<double> descent(n);
      for (int i = 0; i < n; ++i) descent[i] = b[i] / jtj_scale;
      moved = try_step(descent, 25);
    }
    if (std::getenv("LDSDA_RESTORE_TRACE") != nullptr) {
      std::fprintf(stderr, "    restore it=%d viol=%.3e merit=%.3e nu=%.1e %s\n",
                   it, out.violation, merit, nu, moved ? "" : "STALL");
    }
    if (!moved) {
      out.stalled = true;
      break;
    }
  }
  prog.forward(x);
  return out;
}

// Detects equality rows that pin one variable to a constant: x, -x,
// x - c, c - x, x + c. Returns true and fills (var, value) on a match.
bool singleton_equality(const Expr& body, int* var, double* value) {
  switch (body.kind()) {
    case Expr::Kind::kVar:
      *var = body.var_index();
      *value = 0.0;
      return true;
    case Expr::Kind::kNeg:
      if (body.child(0).kind() == Expr::Kind::kVar) {
        *var = body.child(0).var_index();
        *value = 0.0;
        return true;
      }
      return false;
    case Expr::Kind::kAdd:
    case Expr::Kind::kSub: {
      const Expr& a = body.child(0);
      const Expr& b = body.child(1);
      const bool sub = body.kind() == Expr::Kind::kSub;
      if (a.kind() == Expr::Kind::kVar && b.kind() == Expr::Kind::kConstant) {
        *var = a.var_index();
        *value = sub ? b.constant_value() : -b.constant_value();
        return true;
      }
      if (a.kind() == Expr::Kind::kConstant && b.kind() == Expr::Kind::kVar) {
        *var = b.var_index();
        *value = sub ? a.constant_value() : -a.constant_value();
        return true;
      }
      return false;
    }
    default:
      return false;
  }
}

// Narrows bounds of variables pinned by singleton equalities; the rows stay
// in the problem (their Jacobians are trivial), but the solver treats the
// variables as fixed. Returns false when a pin lands outside its variable's
// bounds, which proves the subproblem infeasible outright. `pins` records
// one (row, var, sign) per pinned variable so the missing multipliers can
// be recovered afterwards.
struct SingletonPin {
  int row;   // equality index
  int var;
  double coeff;  // d(body)/d(var), +1 or -1
};

bool presolve_fixed_variables(Nlp& nlp, std::vector<SingletonPin>& pins) {
  std::vector<bool> seen(nlp.num_vars(), false);
  for (size_t r = 0; r < nlp.equalities.size(); ++r) {
    const Expr& body = nlp.equalities[r];
    int var = -1;
    double value = 0.0;
    if (!singleton_equality(body, &var, &value)) continue;
    Nlp::Variable& v = nlp.variables[var];
    if (value < v.lower - 1e-9 || value > v.upper + 1e-9) return false;
    v.lower = value;
    v.upper = value;
    v.initial = value;
    if (!seen[var]) {
      seen[var] = true;
      const double coeff =
          body.kind() == Expr::Kind::kNeg ||
                  (body.kind() == Expr::Kind::kSub &&
                   body.child(0).kind() == Expr::Kind::kConstant)
              ? -1.0
              : 1.0;
      pins.push_back({static_cast<int>(r), var, coeff});
    }
  }
  return true;
}

// The pinned variables were excluded from the multiplier least squares;
// their singleton rows absorb whatever Lagrangian gradient remains there.
void complete_pinned_multipliers(const Nlp& original,
                                 const std::vector<SingletonPin>& pins,
                                 std::span<const double> x,
                                 std::vector<double>& lam,
                                 const std::vector<double>& mu) {
  if (pins.empty()) return;
  const int n = original.num_vars();
  std::vector<double> grad_l = original.objective.gradient(x);
  grad_l.resize(n, 0.0);
  for (size_t i = 0; i < original.equalities.size(); ++i) {
    if (lam[i] == 0.0) continue;
    std::vector<double> g = original.equalities[i].gradient(x);
    g.resize(n, 0.0);
    for (int k = 0; k < n; ++k) grad_l[k] += lam[i] * g[k];
  }
  for (size_t j = 0; j < original.inequalities.size(); ++j) {
    if (mu[j] == 0.0) continue;
    std::vector<double> g = original.inequalities[j].gradient(x);
    g.resize(n, 0.0);
    for (int k = 0; k < n; ++k) grad_l[k] += mu[j] * g[k];
  }
  for (const SingletonPin& pin : pins) {
    lam[pin.row] -= grad_l[pin.var] / pin.coeff;
    grad_l[pin.var] = 0.0;
  }
}

}  // namespace

double max_constraint_violation(const Nlp& nlp, std::span<const double> point) {
  double v = 0.0;
  for (const Expr& e : nlp.equalities) v = std::max(v, std::abs(e.eval(point)));
  for (const Expr& e : nlp.inequalities) v = std::max(v, e.eval(point));
  return v;
}

double kkt_residual(const Nlp& nlp, std::span<const double> point,
                    std::span<const double> equality_multipliers,
                    std::span<const double> inequality_multipliers) {
  if (static_cast<int>(point.size()) != nlp.num_vars() ||
      equality_multipliers.size() != nlp.equalities.size() ||
      inequality_multipliers.size() != nlp.inequalities.size())
    throw DimensionMismatch("kkt_residual: inconsistent dimensions");

  // Lagrangian gradient assembled from scratch, independent of solver state.
  std::vector<double> grad_l = nlp.objective.gradient(point);
  grad_l.resize(nlp.num_vars(), 0.0);
  for (size_t i = 0; i < nlp.equalities.size(); ++i) {
    if (equality_multipliers[i] == 0.0) continue;
    std::vector<double> g = nlp.equalities[i].gradient(point);
    g.resize(nlp.num_vars(), 0.0);
    for (int k = 0; k < nlp.num_vars(); ++k)
      grad_l[k] += equality_multipliers[i] * g[k];
  }
  double complementarity = 0.0;
  for (size_t j = 0; j < nlp.inequalities.size(); ++j) {
    const double mu = inequality_multipliers[j];
    const double gj = nlp.inequalities[j].eval(point);
    complementarity = std::max(complementarity, std::abs(mu * gj));
    if (mu == 0.0) continue;
    std::vector<double> g = nlp.inequalities[j].gradient(point);
    g.resize(nlp.num_vars(), 0.0);
    for (int k = 0; k < nlp.num_vars(); ++k) grad_l[k] += mu * g[k];
  }
  double stationarity = 0.0;
  for (int k = 0; k < nlp.num_vars(); ++k) {
    const double p = std::clamp(point[k] - grad_l[k], nlp.variables[k].lower,
                                nlp.variables[k].upper);
    stationarity = std::max(stationarity, std::abs(p - point[k]));
  }
  const double primal = max_constraint_violation(nlp, point);
  return std::max({stationarity, complementarity, primal});
}

namespace {

// Rank-revealing Householder QR with column pivoting of an n x m matrix
// (columns are active-constraint gradients restricted to free coordinates).
// Gives the orthogonal projector onto the column space and min-norm least
// squares solutions; the normal equations are avoided on purpose, since
// duplicated and near-dependent constraint rows are routine here.
class PivotedQr {
 public:
  PivotedQr(std::vector<double> a, int n, int m, double rel_tol)
      : a_(std::move(a)), n_(n), m_(m) {
    perm_.resize(m_);
    for (int j = 0; j < m_; ++j) perm_[j] = j;
    const int kmax = std::min(n_, m_);
    rdiag_.assign(kmax, 0.0);
    rank_ = 0;
    double first = -1.0;
    for (int k = 0; k < kmax; ++k) {
      int best = k;
      double best_norm = -1.0;
      for (int j = k; j < m_; ++j) {
        double s = 0.0;
        for (int i = k; i < n_; ++i) s += at(i, j) * at(i, j);
        if (s > best_norm) {
          best_norm = s;
          best = j;
        }
      }
      if (best != k) {
        for (int i = 0; i < n_; ++i) std::swap(at(i, k), at(i, best));
        std::swap(perm_[k], perm_[best]);
      }
      const double col_norm = std::sqrt(std::max(best_norm, 0.0));
      if (k == 0) first = std::max(col_norm, 1e-300);
      if (col_norm <= rel_tol * first) break;
      // Householder vector for rows k..n-1 of column k.
      const double sigma = at(k, k) >= 0.0 ? col_norm : -col_norm;
      at(k, k) += sigma;
      const double vtv = sigma * at(k, k);  // v^T v / 2 ... = sigma * v_k
      rdiag_[k] = -sigma;
      if (vtv > 0.0) {
        for (int j = k + 1; j < m_; ++j) {
          double dot = 0.0;
          for (int i = k; i < n_; ++i) dot += at(i, k) * at(i, j);
          const double factor = dot / vtv;
          for (int i = k; i < n_; ++i) at(i, j) -= factor * at(i, k);
        }
      }
      ++rank_;
    }
  }

  int rank() const { return rank_; }

  // x := Q^T x.
  void apply_qt(std::vector<double>& x) const {
    for (int k = 0; k < rank_; ++k) reflect(k, x);
  }
  // x := Q x.
  void apply_q(std::vector<double>& x) const {
    for (int k = rank_ - 1; k >= 0; --k) reflect(k, x);
  }

  // Orthogonal projection of g onto the complement of the column space.
  std::vector<double> project_out(std::vector<double> g) const {
    apply_qt(g);
    for (int i = 0; i < rank_; ++i) g[i] = 0.0;
    apply_q(g);
    return g;
  }

  // Min-norm-style least squares: y with A y ~ b, zeros on columns beyond
  // the numerical rank.
  std::vector<double> solve_ls(std::vector<double> b) const {
    apply_qt(b);
    std::vector<double> y(m_, 0.0);
    for (int k = rank_ - 1; k >= 0; --k) {
      double v = b[k];
      for (int j = k + 1; j < rank_; ++j) v -= r_entry(k, j) * y[perm_[j]];
      y[perm_[k]] = v / rdiag_[k];
    }
    return y;
  }

 private:
  double& at(int i, int j) { return a_[static_cast<size_t>(j) * n_ + i]; }
  double at(int i, int j) const { return a_[static_cast<size_t>(j) * n_ + i]; }
  // R(k, j) for j > k lives in the factored storage above the Householder
  // vectors.
  double r_entry(int k, int j) const { return at(k, j); }

  void reflect(int k, std::vector<double>& x) const {
    const double vtv = -rdiag_[k] * at(k, k);
    if (vtv <= 0.0) return;
    double dot = 0.0;
    for (int i = k; i < n_; ++i) dot += at(i, k) * x[i];
    const double factor = dot / vtv;
    for (int i = k; i < n_; ++i) x[i] -= factor * at(i, k);
  }

  std::vector<double> a_;  // column-major, overwritten by the factorization
  int n_;
  int m_;
  int rank_ = 0;
  std::vector<int> perm_;
  std::vector<double> rdiag_;
};

// Working geometry at a feasible iterate: constraint Jacobian, active set,
// free-coordinate mask, projected objective gradient, and least-squares
// multipliers, all from one assembly.
struct Workspace {
  std::vector<double> jac;        // m x n constraint Jacobian
  std::vector<int> active;        // row ids: equalities + active inequalities
  std::vector<bool> free_coord;   // not pinned at a bound by the gradient
  std::vector<double> grad_f;
  std::vector<double> direction;  // projected steepest descent, masked
  std::vector<double> lam;        // equality multipliers
  std::vector<double> mu;         // inequality multipliers (0 when inactive)
  double direction_norm = 0.0;
  // Orthonormal basis of the tangent space (null space of the active rows
  // over the free coordinates), columns of length n; usually only a few.
  std::vector<std::vector<double>> tangent;
};

class FeasibleDescent {
 public:
  FeasibleDescent(Program& prog, const Nlp& nlp)
      : prog_(prog), nlp_(nlp), n_(nlp.num_vars()),
        m_(prog.num_eq + prog.num_ineq) {}

  // Assembles the workspace at x (tape must be forwarded at x). The active
  // set starts as {equalities} + {inequalities with g >= -act_tol}; rows
  // whose least-squares multiplier comes out negative are dropped and the
  // projection recomputed, standard gradient-projection style.
  bool assemble(const std::vector<double>& x, Workspace& w) {
    const int meq = prog_.num_eq;
    w.jac.assign(static_cast<size_t>(m_) * n_, 0.0);
    std::vector<double> seeds(1 + m_, 0.0), row(n_);
    seeds[0] = 1.0;
    w.grad_f.assign(n_, 0.0);
    prog_.tape.reverse(seeds, w.grad_f);
    for (int r = 0; r < m_; ++r) {
      std::fill(seeds.begin(), seeds.end(), 0.0);
      seeds[1 + r] = 1.0;
      prog_.tape.reverse(seeds, row);
      std::copy(row.begin(), row.end(),
                w.jac.begin() + static_cast<size_t>(r) * n_);
    }

    w.active.clear();
    for (int i = 0; i < meq; ++i) w.active.push_back(i);
    for (int j = 0; j < prog_.num_ineq; ++j)
      if (prog_.ineq(j) >= -1e-8) w.active.push_back(meq + j);

    w.free_coord.assign(n_, true);
    for (int i = 0; i < n_; ++i) {
      const double lo = nlp_.variables[i].lower;
      const double hi = nlp_.variables[i].upper;
      if (hi - lo <= 1e-14) w.free_coord[i] = false;
    }

    // Active-set loop: a coordinate at a bound is pinned only while the
    // Lagrangian gradient pushes outward (its bound multiplier has the
    // right sign); otherwise it stays in the multiplier fit. Inequality
    // rows with negative multipliers are dropped one at a time.
    for (int round = 0; round < m_ + n_ + 2; ++round) {
      if (!project(w)) return false;
      // Lagrangian residual with the current multipliers, all coordinates.
      std::vector<double> residual = w.grad_f;
      for (size_t k = 0; k < w.active.size(); ++k) {
        const int r = w.active[k];
        const double y =
            r < meq ? w.lam[r] : w.mu[r - meq];
        if (y == 0.0) continue;
        const double* jr = &w.jac[static_cast<size_t>(r) * n_];
        for (int i = 0; i < n_; ++i) residual[i] += y * jr[i];
      }
      bool changed = false;
      for (int i = 0; i < n_; ++i) {
        const double lo = nlp_.variables[i].lower;
        const double hi = nlp_.variables[i].upper;
        if (hi - lo <= 1e-14) continue;
        const bool at_lo = x[i] <= lo + 1e-11 * (1.0 + std::abs(lo));
        const bool at_hi = x[i] >= hi - 1e-11 * (1.0 + std::abs(hi));
        const bool wants_pin =
            (at_lo && residual[i] > 0.0) || (at_hi && residual[i] < 0.0);
        if (wants_pin != !w.free_coord[i]) {
          w.free_coord[i] = !wants_pin;
          changed = true;
        }
      }
      if (changed) continue;
      // Inequality rows with negative multipliers do not bind.
      int drop = -1;
      double most_negative = -1e-9;
      for (size_t k = 0; k < w.active.size(); ++k) {
        const int r = w.active[k];
        if (r < meq) continue;
        const double mu_r = w.mu[r - meq];
        if (mu_r < most_negative) {
          most_negative = mu_r;
          drop = static_cast<int>(k);
        }
      }
      if (drop < 0) break;
      w.mu[w.active[drop] - meq] = 0.0;
      w.active.erase(w.active.begin() + drop);
    }
    return true;
  }

  // Newton step in the tangent space: reduced Hessian of the Lagrangian by
  // central differences of gradient sweeps along the few tangent columns.
  // Falls back to false when the reduced system cannot produce descent.
  bool reduced_newton(const Workspace& w, const std::vector<double>& x,
                      std::vector<double>& dir) {
    const int dof = static_cast<int>(w.tangent.size());
    if (dof == 0) return false;
    const int meq = prog_.num_eq;
    std::vector<double> seeds(1 + m_, 0.0);
    seeds[0] = 1.0;
    for (int r = 0; r < meq; ++r) seeds[1 + r] = w.lam[r];
    for (int j = 0; j < prog_.num_ineq; ++j)
      seeds[1 + meq + j] = w.mu[j];

    std::vector<double> gplus(n_), gminus(n_), shifted(n_);
    std::vector<double> h_red(static_cast<size_t>(dof) * dof, 0.0);
    std::vector<double> hz(n_);
    bool ok = true;
    for (int k = 0; k < dof && ok; ++k) {
      const double h = 1e-5;
      for (int i = 0; i < n_; ++i) shifted[i] = x[i] + h * w.tangent[k][i];
      if (!prog_.forward(shifted)) { ok = false; break; }
      prog_.tape.reverse(seeds, gplus);
      for (int i = 0; i < n_; ++i) shifted[i] = x[i] - h * w.tangent[k][i];
      if (!prog_.forward(shifted)) { ok = false; break; }
      prog_.tape.reverse(seeds, gminus);
      for (int i = 0; i < n_; ++i) hz[i] = (gplus[i] - gminus[i]) / (2.0 * h);
      for (int j = 0; j < dof; ++j) {
        double dot = 0.0;
        for (int i = 0; i < n_; ++i) dot += w.tangent[j][i] * hz[i];
        h_red[static_cast<size_t>(j) * dof + k] = dot;
      }
    }
    prog_.forward(x);
    if (!ok) return false;
    for (int j = 0; j < dof; ++j)
      for (int k = j + 1; k < dof; ++k) {
        const double s = 0.5 * (h_red[static_cast<size_t>(j) * dof + k] +
                                h_red[static_cast<size_t>(k) * dof + j]);
        h_red[static_cast<size_t>(j) * dof + k] = s;
        h_red[static_cast<size_t>(k) * dof + j] = s;
      }

    std::vector<double> g_red(dof);
    for (int j = 0; j < dof; ++j) {
      double dot = 0.0;
      for (int i = 0; i < n_; ++i) dot += w.tangent[j][i] * w.grad_f[i];
      g_red[j] = -dot;
    }
    double scale = 1.0;
    for (int j = 0; j < dof; ++j)
      scale = std::max(scale, std::abs(h_red[static_cast<size_t>(j) * dof + j]));
    std::vector<double> s;
    double nu = 1e-10;
    for (int attempt = 0; attempt < 20; ++attempt) {
      if (solve_spd(h_red, dof, nu * scale, g_red, s)) break;
      nu = std::max(nu * 100.0, 1e-8);
      s.clear();
    }
    if (s.empty()) return false;
    dir.assign(n_, 0.0);
    double descent = 0.0;
    for (int j = 0; j < dof; ++j) {
      for (int i = 0; i < n_; ++i) dir[i] += s[j] * w.tangent[j][i];
    }
    for (int i = 0; i < n_; ++i) descent += dir[i] * w.grad_f[i];
    return descent < 0.0;
  }

 private:
  // Projects -grad_f onto the null space of the active rows over the free
  // coordinates, extracts the least-squares multipliers, and keeps the
  // tangent basis; all via one rank-revealing QR over the compacted free
  // coordinates.
  bool project(Workspace& w) {
    const int meq = prog_.num_eq;
    const int ma = static_cast<int>(w.active.size());
    w.lam.assign(meq, 0.0);
    w.mu.assign(prog_.num_ineq, 0.0);
    w.tangent.clear();

    std::vector<int> free_idx;
    free_idx.reserve(n_);
    for (int i = 0; i < n_; ++i)
      if (w.free_coord[i]) free_idx.push_back(i);
    const int nf = static_cast<int>(free_idx.size());

    std::vector<double> v(nf);
    for (int c = 0; c < nf; ++c) v[c] = w.grad_f[free_idx[c]];

    int rank = 0;
    std::vector<double> residual = v;
    if (ma > 0 && nf > 0) {
      std::vector<double> cols(static_cast<size_t>(nf) * ma);
      for (int a = 0; a < ma; ++a) {
        const double* ja = &w.jac[static_cast<size_t>(w.active[a]) * n_];
        for (int c = 0; c < nf; ++c)
          cols[static_cast<size_t>(a) * nf + c] = ja[free_idx[c]];
      }
      const PivotedQr qr(std::move(cols), nf, ma, 1e-10);
      rank = qr.rank();
      std::vector<double> neg_v(nf);
      for (int c = 0; c < nf; ++c) neg_v[c] = -v[c];
      const std::vector<double> y = qr.solve_ls(std::move(neg_v));
      for (int a = 0; a < ma; ++a) {
        if (w.active[a] < meq) w.lam[w.active[a]] = y[a];
        else w.mu[w.active[a] - meq] = y[a];
      }
      residual = qr.project_out(std::move(residual));
      // Tangent basis: Q columns past the numerical rank.
      const int dof = nf - rank;
      constexpr int kMaxTangent = 24;
      if (dof <= kMaxTangent) {
        for (int k = rank; k < nf; ++k) {
          std::vector<double> e(nf, 0.0);
          e[k] = 1.0;
          qr.apply_q(e);
          std::vector<double> column(n_, 0.0);
          for (int c = 0; c < nf; ++c) column[free_idx[c]] = e[c];
          w.tangent.push_back(std::move(column));
        }
      }
    } else if (nf > 0) {
      // No active constraints: the whole free space is tangent.
      constexpr int kMaxTangent = 24;
      if (nf <= kMaxTangent) {
        for (int c = 0; c < nf; ++c) {
          std::vector<double> column(n_, 0.0);
          column[free_idx[c]] = 1.0;
          w.tangent.push_back(std::move(column));
        }
      }
    }

    w.direction.assign(n_, 0.0);
    w.direction_norm = 0.0;
    for (int c = 0; c < nf; ++c) {
      w.direction[free_idx[c]] = -residual[c];
      w.direction_norm = std::max(w.direction_norm, std::abs(residual[c]));
    }
    return true;
  }

  Program& prog_;
  const Nlp& nlp_;
  int n_;
  int m_;
};

}  // namespace

SubproblemResult InteriorPointSolver::solve(const Nlp& input,
                                            const WarmStart* init,
                                            const SolverConfig& config) const {
  // Work on a presolved copy: singleton equalities become fixed bounds.
  Nlp nlp = input;
  std::vector<SingletonPin> pins;
  const bool presolve_ok = presolve_fixed_variables(nlp, pins);

  auto run = [&](std::vector<double> x0) -> SubproblemResult {
    Program prog(nlp);
    project(nlp, x0);
    const int n = nlp.num_vars();

    SubproblemResult result;
    result.point = x0;
    if (!presolve_ok) {
      // A variable is pinned outside its own bounds.
      result.status = SolveStatus::kInfeasible;
      return result;
    }
    if (!prog.forward(x0)) {
      result.status = SolveStatus::kSolverError;
      return result;
    }
    if (n == 0) {
      result.status = SolveStatus::kOptimal;
      result.objective = prog.objective();
      return result;
    }

    const double restore_target = 0.05 * config.feasibility_tol;
    RestoreOutcome restored =
        restore_feasibility(prog, nlp, x0, restore_target, 150);
    if (restored.violation > config.feasibility_tol) {
      // Retry once from the default start before calling it infeasible:
      // a bad warm start should not condemn the configuration.
      std::vector<double> alt = nlp.default_start();
      project(nlp, alt);
      const RestoreOutcome again =
          restore_feasibility(prog, nlp, alt, restore_target, 150);
      if (again.violation > config.feasibility_tol) {
        result.status = SolveStatus::kInfeasible;
        result.point = alt;
        return result;
      }
      x0 = std::move(alt);
    }

    FeasibleDescent descent(prog, nlp);
    Workspace w;
    std::vector<double> x = std::move(x0);
    prog.forward(x);
    double f_x = prog.objective();
    double step_scale = 1.0;
    int iterations = 0;
    const long iteration_budget =
        static_cast<long>(config.max_outer) * config.max_inner;
    std::vector<double> prev_direction, prev_x;

    while (iterations < iteration_budget) {
      ++iterations;
      prog.forward(x);
      if (!descent.assemble(x, w)) {
        result.status = SolveStatus::kSolverError;
        result.point = x;
        result.iterations = iterations;
        return result;
      }
      if (std::getenv("LDSDA_NLP_TRACE") != nullptr) {
        std::fprintf(stderr, "  it=%d f=%.10f |d|=%.3e step=%.2e\n",
                     iterations, f_x, w.direction_norm, step_scale);
      }

      // Convergence: the projected gradient vanished; verify with the
      // independent KKT measure against the original problem.
      if (w.direction_norm <= 0.5 * config.optimality_tol) {
        std::vector<double> lam = w.lam;
        complete_pinned_multipliers(input, pins, x, lam, w.mu);
        const double res = kkt_residual(input, x, lam, w.mu);
        const double viol = max_constraint_violation(input, x);
        if (std::getenv("LDSDA_NLP_TRACE") != nullptr) {
          std::fprintf(stderr, "  candidate: |d|=%.2e kkt=%.3e viol=%.2e\n",
                       w.direction_norm, res, viol);
          std::vector<double> gl = input.objective.gradient(x);
          gl.resize(n, 0.0);
          for (size_t i2 = 0; i2 < input.equalities.size(); ++i2) {
            if (lam[i2] == 0.0) continue;
            auto g2 = input.equalities[i2].gradient(x);
            g2.resize(n, 0.0);
            for (int k2 = 0; k2 < n; ++k2) gl[k2] += lam[i2] * g2[k2];
          }
          int worst = -1;
          double wv = -1.0;
          for (int k2 = 0; k2 < n; ++k2) {
            const double pr =
                std::clamp(x[k2] - gl[k2], input.variables[k2].lower,
                           input.variables[k2].upper);
            if (std::abs(pr - x[k2]) > wv) {
              wv = std::abs(pr - x[k2]);
              worst = k2;
            }
          }
          if (worst >= 0)
            std::fprintf(stderr, "    worst: var %d (%s) x=%.5f gl=%.5f\n",
                         worst, input.variables[worst].name.c_str(), x[worst],
                         gl[worst]);
        }
        if (viol <= config.feasibility_tol &&
            res <= config.optimality_tol) {
          result.status = SolveStatus::kOptimal;
          prog.forward(x);
          result.objective = prog.objective();
          result.point = x;
          result.equality_multipliers = std::move(lam);
          result.inequality_multipliers = w.mu;
          result.iterations = iterations;
          return result;
        }
      }

      // Barzilai-Borwein scaling of the projected gradient step.
      if (!prev_x.empty()) {
        double ss = 0.0, sy = 0.0;
        for (int i = 0; i < n; ++i) {
          const double s = x[i] - prev_x[i];
          const double yv = prev_direction[i] - w.direction[i];
          ss += s * s;
          sy += s * yv;
        }
        if (sy > 1e-16) step_scale = std::clamp(ss / sy, 1e-6, 1e6);
      }
      prev_x = x;
      prev_direction = w.direction;

      // Direction candidates: the tangent-space Newton step when it exists
      // (it resolves long curved valleys in a few iterations), then the
      // scaled projected gradient.
      std::vector<std::pair<const std::vector<double>*, double>> candidates;
      std::vector<double> newton_dir;
      if (descent.reduced_newton(w, x, newton_dir))
        candidates.push_back({&newton_dir, 1.0});
      candidates.push_back({&w.direction, step_scale});

      bool moved = false;
      for (const auto& [dir_ptr, t0] : candidates) {
        const std::vector<double>& dir = *dir_ptr;
        double t = t0;
        for (int bt = 0; bt < 24 && !moved; ++bt) {
          std::vector<double> trial(n);
          for (int i = 0; i < n; ++i)
            trial[i] = std::clamp(x[i] + t * dir[i], nlp.variables[i].lower,
                                  nlp.variables[i].upper);
          const RestoreOutcome pulled =
              restore_feasibility(prog, nlp, trial, restore_target, 60);
          if (pulled.violation <= config.feasibility_tol &&
              prog.forward(trial)) {
            const double f_trial = prog.objective();
            if (f_trial < f_x - 1e-16 * (1.0 + std::abs(f_x))) {
              x = std::move(trial);
              f_x = f_trial;
              moved = true;
            }
          }
          t *= 0.25;
        }
        if (moved) break;
      }
      if (!moved) {
        // No feasible descent from here at any step length.
        break;
      }
    }

    prog.forward(x);
    const double final_viol = max_constraint_violation(input, x);
    if (final_viol <= config.feasibility_tol && descent.assemble(x, w)) {
      std::vector<double> lam = w.lam;
      complete_pinned_multipliers(input, pins, x, lam, w.mu);
      const double res = kkt_residual(input, x, lam, w.mu);
      if (res <= config.optimality_tol) {
        result.status = SolveStatus::kOptimal;
        result.objective = prog.objective();
        result.point = x;
        result.equality_multipliers = std::move(lam);
        result.inequality_multipliers = w.mu;
        result.iterations = iterations;
        return result;
      }
    }
    result.status = final_viol > config.feasibility_tol
                        ? SolveStatus::kInfeasible
                        : SolveStatus::kSolverError;
    result.point = x;
    result.iterations = iterations;
    return result;
  };

  const bool have_warm = init != nullptr && !init->point.empty();
  if (have_warm && static_cast<int>(init->point.size()) != nlp.num_vars())
    throw DimensionMismatch("warm start dimension does not match subproblem");

  SubproblemResult result =
      run(have_warm ? init->point : nlp.default_start());
  if (result.status != SolveStatus::kOptimal && have_warm &&
      config.midpoint_fallback) {
    SubproblemResult fallback = run(nlp.default_start());
    if (fallback.status == SolveStatus::kOptimal ||
        (result.status == SolveStatus::kSolverError &&
         fallback.status == SolveStatus::kInfeasible))
      return fallback;
  }
  return result;
}

}  // namespace ldsda
