#include "ldsda/models.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ldsda/errors.hpp"

namespace ldsda {

namespace {

void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidParams(message);
}

}  // namespace

BuiltGdp build_cstr(const CstrParams& p) {
  require(p.reactors >= 1, "reactors must be >= 1");
  require(p.rate_constant > 0, "rate_constant must be > 0");
  require(p.feed_a > 0 || p.feed_b > 0, "total feed must be positive");
  require(p.feed_a >= 0 && p.feed_b >= 0, "feeds must be nonnegative");
  require(p.feed_flow > 0, "feed_flow must be > 0");
  require(p.purity > 0 && p.purity < 1, "purity must lie in (0, 1)");
  require(p.volume_max > 0 && p.flow_max > 0, "bounds must be positive");

  const int R = p.reactors;
  const double fm = p.flow_max;
  Model m;

  // Initial values start the subsolver on the branch where product B
  // appears only downstream of the recycle injection. The autocatalytic
  // cascade also admits self-ignited steady states with B everywhere and no
  // recycle need; a solve drifting onto that family would make the recycle
  // position irrelevant. Zero-B initials keep the deterministic local
  // solver on the seeded branch, where unreached units stay inert (but
  // still pay their equal-volume share).
  const double total_feed = p.feed_a + p.feed_b;
  const double q0 = 0.5 * p.feed_flow;  // recycle volumetric flow guess
  auto id2 = [R](int i, int n) { return i * R + n; };
  std::vector<int> F(2 * R), FR(2 * R), rate(2 * R);
  std::vector<int> Q(R), QFR(R), V(R), C(R);
  const char* comp[2] = {"A", "B"};
  for (int i = 0; i < 2; ++i) {
    for (int n = 0; n < R; ++n) {
      const std::string tag = std::string(comp[i]) + "_" + std::to_string(n + 1);
      F[id2(i, n)] =
          m.add_continuous("F_" + tag, 0.0, fm, i == 0 ? p.feed_a : 0.0);
      FR[id2(i, n)] = m.add_continuous("FR_" + tag, 0.0, fm, 0.0);
      rate[id2(i, n)] = m.add_continuous("r_" + tag, -fm, fm, 0.0);
    }
  }
  for (int n = 0; n < R; ++n) {
    const std::string tag = std::to_string(n + 1);
    Q[n] = m.add_continuous("Q_" + tag, 0.0, fm, p.feed_flow);
    QFR[n] = m.add_continuous("QFR_" + tag, 0.0, fm, 0.0);
    V[n] = m.add_continuous("V_" + tag, 0.0, p.volume_max, 1.0);
    C[n] = m.add_continuous("c_" + tag, 0.0, p.volume_max, 1.0);
  }
  const int RA = m.add_continuous("R_A", 0.0, fm,
                                  (1.0 - p.purity) * total_feed * q0);
  const int RB = m.add_continuous("R_B", 0.0, fm, p.purity * total_feed * q0);
  const int PA = m.add_continuous("P_A", 0.0, fm, (1.0 - p.purity) * total_feed);
  const int PB = m.add_continuous("P_B", 0.0, fm, p.purity * total_feed);
  const int QR = m.add_continuous("Q_R", 0.0, fm, q0);
  const int QP = m.add_continuous("Q_P", 0.0, fm, p.feed_flow);

  auto x = [](int id) { return Expr::var(id); };

  std::vector<int> YF(R), YR(R), YP(R), YP_not(R), YR_not(R);
  for (int n = 0; n < R; ++n)
    YF[n] = m.add_boolean("YF_" + std::to_string(n + 1));
  for (int n = 0; n < R; ++n)
    YR[n] = m.add_boolean("YR_" + std::to_string(n + 1));
  for (int n = 0; n < R; ++n) {
    YP[n] = m.add_boolean("YP_" + std::to_string(n + 1));
    YP_not[n] = m.add_boolean("YP_byp_" + std::to_string(n + 1));
    YR_not[n] = m.add_boolean("YR_off_" + std::to_string(n + 1));
  }

  // Unit NT receives the fresh feed; the sequence runs top to bottom.
  const int top = R - 1;
  const double f0[2] = {p.feed_a, p.feed_b};
  for (int i = 0; i < 2; ++i) {
    m.add_global_constraint(
        Expr::constant(f0[i]) + x(FR[id2(i, top)]) - x(F[id2(i, top)]) +
            x(rate[id2(i, top)]) * x(V[top]),
        Relation::kEqualZero, std::string("feed_balance_") + comp[i]);
  }
  m.add_global_constraint(
      Expr::constant(p.feed_flow) + x(QFR[top]) - x(Q[top]),
      Relation::kEqualZero, "feed_continuity");
  for (int n = 0; n < R - 1; ++n) {
    for (int i = 0; i < 2; ++i) {
      m.add_global_constraint(
          x(F[id2(i, n + 1)]) + x(FR[id2(i, n)]) - x(F[id2(i, n)]) +
              x(rate[id2(i, n)]) * x(V[n]),
          Relation::kEqualZero,
          "balance_" + std::string(comp[i]) + "_" + std::to_string(n + 1));
    }
    m.add_global_constraint(x(Q[n + 1]) + x(QFR[n]) - x(Q[n]),
                            Relation::kEqualZero,
                            "continuity_" + std::to_string(n + 1));
  }
  for (int i = 0; i < 2; ++i) {
    m.add_global_constraint(
        x(F[id2(i, 0)]) - x(i == 0 ? PA : PB) - x(i == 0 ? RA : RB),
        Relation::kEqualZero, std::string("split_balance_") + comp[i]);
  }
  m.add_global_constraint(x(Q[0]) - x(QP) - x(QR), Relation::kEqualZero,
                          "split_continuity");
  for (int i = 0; i < 2; ++i) {
    m.add_global_constraint(
        x(i == 0 ? PA : PB) * x(Q[0]) - x(F[id2(i, 0)]) * x(QP),
        Relation::kEqualZero, std::string("split_fraction_") + comp[i]);
  }
  m.add_global_constraint(Expr::constant(p.purity) * x(QP) - x(PB),
                          Relation::kEqualZero, "product_spec");
  for (int n = 1; n < R; ++n) {
    m.add_global_constraint(x(V[n]) - x(V[n - 1]), Relation::kEqualZero,
                            "equal_volume_" + std::to_string(n + 1));
  }

  // CSTR-or-bypass disjunction per unit.
  for (int n = 0; n < R; ++n) {
    Disjunct cstr;
    cstr.indicator = YP[n];
    cstr.constraints.push_back(
        {x(rate[id2(0, n)]) * pow_int(x(Q[n]), 2) +
             Expr::constant(p.rate_constant) * x(F[id2(0, n)]) * x(F[id2(1, n)]),
         Relation::kEqualZero, "rate_A_" + std::to_string(n + 1)});
    cstr.constraints.push_back(
        {x(rate[id2(1, n)]) + x(rate[id2(0, n)]), Relation::kEqualZero,
         "rate_B_" + std::to_string(n + 1)});
    cstr.constraints.push_back({x(C[n]) - x(V[n]), Relation::kEqualZero,
                                "cost_on_" + std::to_string(n + 1)});
    Disjunct bypass;
    bypass.indicator = YP_not[n];
    for (int i = 0; i < 2; ++i) {
      bypass.constraints.push_back(
          {x(FR[id2(i, n)]), Relation::kEqualZero,
           "bypass_FR_" + std::string(comp[i]) + "_" + std::to_string(n + 1)});
      bypass.constraints.push_back(
          {x(rate[id2(i, n)]), Relation::kEqualZero,
           "bypass_r_" + std::string(comp[i]) + "_" + std::to_string(n + 1)});
    }
    bypass.constraints.push_back({x(QFR[n]), Relation::kEqualZero,
                                  "bypass_QFR_" + std::to_string(n + 1)});
    bypass.constraints.push_back({x(C[n]), Relation::kEqualZero,
                                  "cost_off_" + std::to_string(n + 1)});
    m.add_disjunction({cstr, bypass});
  }

  // Recycle-location disjunction per unit.
  for (int n = 0; n < R; ++n) {
    Disjunct on;
    on.indicator = YR[n];
    for (int i = 0; i < 2; ++i) {
      on.constraints.push_back(
          {x(FR[id2(i, n)]) - x(i == 0 ? RA : RB), Relation::kEqualZero,
           "recycle_" + std::string(comp[i]) + "_" + std::to_string(n + 1)});
    }
    on.constraints.push_back({x(QFR[n]) - x(QR), Relation::kEqualZero,
                              "recycle_Q_" + std::to_string(n + 1)});
    Disjunct off;
    off.indicator = YR_not[n];
    for (int i = 0; i < 2; ++i) {
      off.constraints.push_back(
          {x(FR[id2(i, n)]), Relation::kEqualZero,
           "norecycle_" + std::string(comp[i]) + "_" + std::to_string(n + 1)});
    }
    off.constraints.push_back({x(QFR[n]), Relation::kEqualZero,
                               "norecycle_Q_" + std::to_string(n + 1)});
    m.add_disjunction({on, off});
  }

  m.add_logic_prop(Prop::exactly(1, YF));
  m.add_logic_prop(Prop::exactly(1, YR));
  // Unit n is a CSTR iff no feed enters strictly above it.
  for (int n = 0; n < R; ++n) {
    std::vector<Prop> none_before;
    for (int j = 0; j <= n; ++j)
      none_before.push_back(Prop::negate(Prop::lit(YF[j])));
    m.add_logic_prop(Prop::iff(
        Prop::lit(YP[n]),
        Prop::disjunction({Prop::conjunction(std::move(none_before)),
                           Prop::lit(YF[n])})));
  }
  for (int n = 0; n < R; ++n)
    m.add_logic_prop(Prop::implies(Prop::lit(YR[n]), Prop::lit(YP[n])));

  Expr obj = Expr::constant(0.0);
  for (int n = 0; n < R; ++n) obj = obj + x(C[n]);
  m.set_objective(obj);

  const ValidationReport report = m.validate();
  if (!report.passed()) throw InvalidParams("cstr model failed validation");

  ExternalVarSpec feed_spec = declare_external(m, YF);
  feed_spec.index = 0;
  ExternalVarSpec recycle_spec = declare_external(m, YR);
  recycle_spec.index = 1;

  m.freeze();
  return {std::move(m), {std::move(feed_spec), std::move(recycle_spec)}};
}

const std::array<std::string, 3>& batch_stage_names() {
  static const std::array<std::string, 3> names = {"mixer", "reactor",
                                                   "centrifuge"};
  return names;
}

BuiltGdp build_small_batch(const BatchParams& p) {
  require(p.horizon > 0, "horizon must be > 0");
  require(p.vol_min > 0 && p.vol_max > p.vol_min, "bad volume range");
  require(p.batch_span > 1, "batch_span must exceed 1");
  for (double d : p.demand) require(d > 0, "demands must be positive");
  for (const auto& row : p.size_factor)
    for (double s : row) require(s > 0, "size factors must be positive");
  for (const auto& row : p.proc_time)
    for (double t : row) require(t > 0, "processing times must be positive");
  for (double a : p.alpha) require(a > 0, "alpha must be positive");
  for (double b : p.beta) require(b > 0, "beta must be positive");

  constexpr int I = BatchParams::kProducts;
  constexpr int J = BatchParams::kStages;
  constexpr int K = BatchParams::kMaxUnits;
  const auto& stage = batch_stage_names();
  const char* prod[I] = {"a", "b"};

  Model m;
  std::array<int, J> v, nunits;
  std::array<int, I> b, tl;
  std::array<std::array<int, J>, K> gamma;

  const double ln3 = std::log(static_cast<double>(K));
  for (int j = 0; j < J; ++j) {
    v[j] = m.add_continuous("v_" + stage[j], std::log(p.vol_min),
                            std::log(p.vol_max), std::log(p.vol_max));
  }
  for (int i = 0; i < I; ++i) {
    double cap = std::numeric_limits<double>::infinity();
    for (int j = 0; j < J; ++j)
      cap = std::min(cap, p.vol_max / p.size_factor[i][j]);
    const double b_hi = std::log(cap);
    const double b_lo = b_hi - std::log(p.batch_span);
    b[i] = m.add_continuous(std::string("b_") + prod[i], b_lo, b_hi, b_hi);
    double t_max = 0.0;
    for (int j = 0; j < J; ++j) t_max = std::max(t_max, p.proc_time[i][j]);
    tl[i] = m.add_continuous(std::string("tl_") + prod[i],
                             std::log(t_max) - ln3, std::log(t_max) + 0.5,
                             std::log(t_max));
  }
  for (int j = 0; j < J; ++j)
    nunits[j] = m.add_continuous("n_" + stage[j], 0.0, ln3, 0.0);
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < J; ++j) {
      gamma[k][j] = m.add_continuous(
          "gamma_" + std::to_string(k + 1) + "_" + stage[j], 0.0, ln3, 0.0);
    }
  }

  auto x = [](int id) { return Expr::var(id); };

  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < J; ++j) {
      m.add_global_constraint(
          Expr::constant(std::log(p.size_factor[i][j])) + x(b[i]) - x(v[j]),
          Relation::kLessEqualZero,
          "volume_" + std::string(prod[i]) + "_" + stage[j]);
      m.add_global_constraint(
          Expr::constant(std::log(p.proc_time[i][j])) - x(nunits[j]) - x(tl[i]),
          Relation::kLessEqualZero,
          "cycle_" + std::string(prod[i]) + "_" + stage[j]);
    }
  }
  Expr horizon_lhs = Expr::constant(-p.horizon);
  for (int i = 0; i < I; ++i)
    horizon_lhs = horizon_lhs + p.demand[i] * exp(x(tl[i]) - x(b[i]));
  m.add_global_constraint(horizon_lhs, Relation::kLessEqualZero, "horizon");
  for (int j = 0; j < J; ++j) {
    Expr sum = x(nunits[j]);
    for (int k = 0; k < K; ++k) sum = sum - x(gamma[k][j]);
    m.add_global_constraint(sum, Relation::kEqualZero, "units_" + stage[j]);
  }

  std::array<std::array<int, J>, K> Y, Y_not;
  for (int j = 0; j < J; ++j) {
    for (int k = 0; k < K; ++k) {
      Y[k][j] = m.add_boolean("Y_" + std::to_string(k + 1) + "_" + stage[j]);
    }
  }
  for (int j = 0; j < J; ++j) {
    for (int k = 0; k < K; ++k) {
      Y_not[k][j] =
          m.add_boolean("Yoff_" + std::to_string(k + 1) + "_" + stage[j]);
    }
  }

  for (int j = 0; j < J; ++j) {
    for (int k = 0; k < K; ++k) {
      Disjunct on;
      on.indicator = Y[k][j];
      on.constraints.push_back(
          {x(gamma[k][j]) - std::log(static_cast<double>(k + 1)),
           Relation::kEqualZero,
           "units_on_" + std::to_string(k + 1) + "_" + stage[j]});
      Disjunct off;
      off.indicator = Y_not[k][j];
      off.constraints.push_back(
          {x(gamma[k][j]), Relation::kEqualZero,
           "units_off_" + std::to_string(k + 1) + "_" + stage[j]});
      m.add_disjunction({on, off});
    }
  }

  std::vector<ExternalVarSpec> specs;
  for (int j = 0; j < J; ++j) {
    std::vector<int> stage_Y;
    for (int k = 0; k < K; ++k) stage_Y.push_back(Y[k][j]);
    m.add_logic_prop(Prop::exactly(1, stage_Y));
  }

  Expr obj = Expr::constant(0.0);
  for (int j = 0; j < J; ++j)
    obj = obj + p.alpha[j] * exp(x(nunits[j]) + p.beta[j] * x(v[j]));
  m.set_objective(obj);

  const ValidationReport report = m.validate();
  if (!report.passed()) throw InvalidParams("small batch model failed validation");

  for (int j = 0; j < J; ++j) {
    std::vector<int> stage_Y;
    for (int k = 0; k < K; ++k) stage_Y.push_back(Y[k][j]);
    ExternalVarSpec spec = declare_external(m, stage_Y);
    spec.index = j;
    specs.push_back(std::move(spec));
  }

  m.freeze();
  return {std::move(m), std::move(specs)};
}

std::map<std::string, std::string> read_params_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParams("cannot open parameter file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line).empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidParams(path + ":" + std::to_string(lineno) +
                          ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw InvalidParams(path + ":" + std::to_string(lineno) +
                          ": expected 'key = value'");
    kv[key] = value;
  }
  return kv;
}

namespace {

// Keys the front end consumes; model parsers let them pass.
const std::set<std::string>& solver_keys() {
  static const std::set<std::string> keys = {"kkt_tol", "feas_tol",
                                             "max_inner", "max_outer"};
  return keys;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    throw InvalidParams("key '" + key + "': bad numeric value '" + value + "'");
  }
}

class KvReader {
 public:
  explicit KvReader(const std::map<std::string, std::string>& kv) : kv_(kv) {}
  void number(const std::string& key, double& out) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return;
    out = to_double(key, it->second);
    used_.insert(key);
  }
  void integer(const std::string& key, int& out) {
    double d = out;
    number(key, d);
    out = static_cast<int>(d);
  }
  void finish() const {
    for (const auto& [key, value] : kv_) {
      if (!used_.count(key) && !solver_keys().count(key))
        throw InvalidParams("unknown parameter key '" + key + "'");
    }
  }

 private:
  const std::map<std::string, std::string>& kv_;
  std::set<std::string> used_;
};

}  // namespace

CstrParams cstr_params_from(const std::map<std::string, std::string>& kv) {
  CstrParams p;
  KvReader r(kv);
  r.integer("reactors", p.reactors);
  r.number("rate_constant", p.rate_constant);
  r.number("feed_a", p.feed_a);
  r.number("feed_b", p.feed_b);
  r.number("feed_flow", p.feed_flow);
  r.number("purity", p.purity);
  r.number("volume_max", p.volume_max);
  r.number("flow_max", p.flow_max);
  r.finish();
  return p;
}

BatchParams batch_params_from(const std::map<std::string, std::string>& kv) {
  BatchParams p;
  KvReader r(kv);
  r.number("horizon", p.horizon);
  const char* prod[] = {"a", "b"};
  const auto& stage = batch_stage_names();
  for (int i = 0; i < BatchParams::kProducts; ++i) {
    r.number(std::string("demand_") + prod[i], p.demand[i]);
    for (int j = 0; j < BatchParams::kStages; ++j) {
      r.number("size_" + std::string(prod[i]) + "_" + stage[j],
               p.size_factor[i][j]);
      r.number("time_" + std::string(prod[i]) + "_" + stage[j],
               p.proc_time[i][j]);
    }
  }
  for (int j = 0; j < BatchParams::kStages; ++j) {
    r.number("alpha_" + stage[j], p.alpha[j]);
    r.number("beta_" + stage[j], p.beta[j]);
  }
  r.number("vol_min", p.vol_min);
  r.number("vol_max", p.vol_max);
  r.number("batch_span", p.batch_span);
  r.finish();
  return p;
}

}  // namespace ldsda
