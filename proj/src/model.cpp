#include "ldsda/model.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "ldsda/errors.hpp"

namespace ldsda {

Prop Prop::lit(int boolean_id) {
  Prop p;
  p.kind_ = Kind::kLit;
  p.boolean_id_ = boolean_id;
  return p;
}

Prop Prop::negate(Prop inner) {
  Prop p;
  p.kind_ = Kind::kNot;
  p.parts_.push_back(std::move(inner));
  return p;
}

Prop Prop::conjunction(std::vector<Prop> parts) {
  Prop p;
  p.kind_ = Kind::kAnd;
  p.parts_ = std::move(parts);
  return p;
}

Prop Prop::disjunction(std::vector<Prop> parts) {
  Prop p;
  p.kind_ = Kind::kOr;
  p.parts_ = std::move(parts);
  return p;
}

Prop Prop::exclusive_or(std::vector<Prop> parts) {
  Prop p;
  p.kind_ = Kind::kXor;
  p.parts_ = std::move(parts);
  return p;
}

Prop Prop::implies(Prop antecedent, Prop consequent) {
  Prop p;
  p.kind_ = Kind::kImplies;
  p.parts_.push_back(std::move(antecedent));
  p.parts_.push_back(std::move(consequent));
  return p;
}

Prop Prop::iff(Prop a, Prop b) {
  Prop p;
  p.kind_ = Kind::kIff;
  p.parts_.push_back(std::move(a));
  p.parts_.push_back(std::move(b));
  return p;
}

Prop Prop::exactly(int count, std::vector<int> boolean_ids) {
  Prop p;
  p.kind_ = Kind::kExactly;
  p.exactly_count_ = count;
  p.exactly_ids_ = std::move(boolean_ids);
  return p;
}

int Prop::max_boolean_id() const {
  int m = boolean_id_;
  for (int id : exactly_ids_) m = std::max(m, id);
  for (const Prop& p : parts_) m = std::max(m, p.max_boolean_id());
  return m;
}

std::string Prop::to_string(const std::vector<std::string>& names) const {
  auto name = [&](int id) {
    return id < static_cast<int>(names.size()) ? names[id]
                                               : "Y" + std::to_string(id);
  };
  std::ostringstream out;
  auto join = [&](const char* sep) {
    for (size_t i = 0; i < parts_.size(); ++i) {
      if (i) out << sep;
      out << parts_[i].to_string(names);
    }
  };
  switch (kind_) {
    case Kind::kLit: out << name(boolean_id_); break;
    case Kind::kNot: out << "!" << parts_[0].to_string(names); break;
    case Kind::kAnd: out << "("; join(" & "); out << ")"; break;
    case Kind::kOr: out << "("; join(" | "); out << ")"; break;
    case Kind::kXor: out << "("; join(" ^ "); out << ")"; break;
    case Kind::kImplies:
      out << "(" << parts_[0].to_string(names) << " -> "
          << parts_[1].to_string(names) << ")";
      break;
    case Kind::kIff:
      out << "(" << parts_[0].to_string(names) << " <-> "
          << parts_[1].to_string(names) << ")";
      break;
    case Kind::kExactly:
      out << "exactly(" << exactly_count_ << "; ";
      for (size_t i = 0; i < exactly_ids_.size(); ++i) {
        if (i) out << ", ";
        out << name(exactly_ids_[i]);
      }
      out << ")";
      break;
  }
  return out.str();
}

void Model::require_mutable() const {
  if (frozen_) throw ModelFrozen("model is frozen");
}

int Model::add_continuous(const std::string& name, double lower, double upper,
                          std::optional<double> initial) {
  require_mutable();
  if (find_continuous(name) >= 0)
    throw DuplicateName("continuous variable '" + name + "' already declared");
  continuous_.push_back({name, lower, upper, initial});
  return static_cast<int>(continuous_.size()) - 1;
}

int Model::add_boolean(const std::string& name) {
  require_mutable();
  if (find_boolean(name) >= 0)
    throw DuplicateName("Boolean variable '" + name + "' already declared");
  booleans_.push_back({name, std::nullopt});
  return static_cast<int>(booleans_.size()) - 1;
}

void Model::fix_boolean(int boolean_id, bool value) {
  require_mutable();
  if (boolean_id < 0 || boolean_id >= num_booleans())
    throw UndeclaredVariable("Boolean id out of range");
  booleans_[boolean_id].fixed = value;
}

int Model::add_global_constraint(Expr body, Relation relation,
                                 const std::string& label) {
  require_mutable();
  if (body.max_var_index() >= num_continuous())
    throw UndeclaredVariable("constraint '" + label +
                             "' references an undeclared variable");
  globals_.push_back({std::move(body), relation, label});
  return static_cast<int>(globals_.size()) - 1;
}

int Model::add_disjunction(std::vector<Disjunct> disjuncts) {
  require_mutable();
  if (disjuncts.size() < 2)
    throw ArityTooSmall("disjunction needs at least two disjuncts");
  for (const Disjunct& d : disjuncts) {
    if (d.indicator < 0 || d.indicator >= num_booleans())
      throw UndeclaredVariable("disjunct indicator out of range");
    for (const Constraint& c : d.constraints) {
      if (c.body.max_var_index() >= num_continuous())
        throw UndeclaredVariable("disjunct constraint '" + c.label +
                                 "' references an undeclared variable");
    }
  }
  disjunctions_.push_back({std::move(disjuncts), false});
  return static_cast<int>(disjunctions_.size()) - 1;
}

void Model::remove_disjunction(int disjunction_id) {
  require_mutable();
  if (disjunction_id < 0 ||
      disjunction_id >= static_cast<int>(disjunctions_.size()))
    throw UndeclaredVariable("disjunction id out of range");
  disjunctions_[disjunction_id].removed = true;
}

int Model::add_logic_prop(Prop prop) {
  require_mutable();
  if (prop.max_boolean_id() >= num_booleans())
    throw UndeclaredVariable("proposition references an undeclared Boolean");
  props_.push_back(std::move(prop));
  return static_cast<int>(props_.size()) - 1;
}

void Model::set_objective(Expr objective) {
  require_mutable();
  objective_ = std::move(objective);
}

void Model::freeze() { frozen_ = true; }

int Model::find_continuous(const std::string& name) const {
  for (size_t i = 0; i < continuous_.size(); ++i)
    if (continuous_[i].name == name) return static_cast<int>(i);
  return -1;
}

int Model::find_boolean(const std::string& name) const {
  for (size_t i = 0; i < booleans_.size(); ++i)
    if (booleans_[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<Prop> Model::all_props() const {
  std::vector<Prop> all = props_;
  for (const Disjunction& dj : disjunctions_) {
    if (dj.removed) continue;
    std::vector<int> ids;
    ids.reserve(dj.disjuncts.size());
    for (const Disjunct& d : dj.disjuncts) ids.push_back(d.indicator);
    all.push_back(Prop::exactly(1, std::move(ids)));
  }
  return all;
}

namespace {

void collect_exactly_issues(const Prop& p, const std::string& entity,
                            std::vector<ValidationIssue>& out) {
  if (p.kind() == Prop::Kind::kExactly) {
    const int m = p.exactly_count();
    const int n = static_cast<int>(p.exactly_ids().size());
    if (m < 1 || m > n) {
      out.push_back({ValidationIssue::Code::kBadExactlyArity, entity,
                     "exactly(" + std::to_string(m) + ") over " +
                         std::to_string(n) + " Booleans"});
    }
  }
  for (const Prop& q : p.parts()) collect_exactly_issues(q, entity, out);
}

}  // namespace

ValidationReport Model::validate() const {
  ValidationReport report;
  for (size_t i = 0; i < continuous_.size(); ++i) {
    const ContinuousVar& v = continuous_[i];
    if (!std::isfinite(v.lower) || !std::isfinite(v.upper)) {
      report.issues.push_back({ValidationIssue::Code::kNonFiniteBound, v.name,
                               "bounds must be finite"});
    } else if (v.lower > v.upper) {
      report.issues.push_back({ValidationIssue::Code::kBoundsReversed, v.name,
                               "lower bound exceeds upper bound"});
    }
  }
  std::unordered_set<int> seen_indicators;
  for (size_t k = 0; k < disjunctions_.size(); ++k) {
    if (disjunctions_[k].removed) continue;
    for (const Disjunct& d : disjunctions_[k].disjuncts) {
      if (!seen_indicators.insert(d.indicator).second) {
        report.issues.push_back({ValidationIssue::Code::kSharedIndicator,
                                 booleans_[d.indicator].name,
                                 "Boolean indicates more than one disjunct"});
      }
    }
  }
  for (size_t i = 0; i < props_.size(); ++i)
    collect_exactly_issues(props_[i], "prop " + std::to_string(i),
                           report.issues);
  if (!objective_.has_value()) {
    report.issues.push_back({ValidationIssue::Code::kMissingObjective,
                             "objective", "no objective set"});
  } else if (objective_->max_var_index() >= num_continuous()) {
    report.issues.push_back({ValidationIssue::Code::kObjectiveBadReference,
                             "objective",
                             "objective references an undeclared variable"});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Report-form serialization (JSON).

namespace {

using nlohmann::ordered_json;

ordered_json expr_to_json(const Expr& e) {
  ordered_json j;
  switch (e.kind()) {
    case Expr::Kind::kConstant:
      j["k"] = "c";
      j["v"] = e.constant_value();
      break;
    case Expr::Kind::kVar:
      j["k"] = "x";
      j["i"] = e.var_index();
      break;
    case Expr::Kind::kNeg:
      j["k"] = "neg";
      j["a"] = expr_to_json(e.child(0));
      break;
    case Expr::Kind::kExp:
      j["k"] = "exp";
      j["a"] = expr_to_json(e.child(0));
      break;
    case Expr::Kind::kLn:
      j["k"] = "ln";
      j["a"] = expr_to_json(e.child(0));
      break;
    case Expr::Kind::kAdd:
      j["k"] = "add";
      j["a"] = expr_to_json(e.child(0));
      j["b"] = expr_to_json(e.child(1));
      break;
    case Expr::Kind::kSub:
      j["k"] = "sub";
      j["a"] = expr_to_json(e.child(0));
      j["b"] = expr_to_json(e.child(1));
      break;
    case Expr::Kind::kMul:
      j["k"] = "mul";
      j["a"] = expr_to_json(e.child(0));
      j["b"] = expr_to_json(e.child(1));
      break;
    case Expr::Kind::kDiv:
      j["k"] = "div";
      j["a"] = expr_to_json(e.child(0));
      j["b"] = expr_to_json(e.child(1));
      break;
    case Expr::Kind::kIPow:
      j["k"] = "ipow";
      j["a"] = expr_to_json(e.child(0));
      j["n"] = e.ipow_exponent();
      break;
  }
  return j;
}

Expr expr_from_json(const ordered_json& j) {
  const std::string k = j.at("k").get<std::string>();
  if (k == "c") return Expr::constant(j.at("v").get<double>());
  if (k == "x") return Expr::var(j.at("i").get<int>());
  if (k == "neg") return -expr_from_json(j.at("a"));
  if (k == "exp") return exp(expr_from_json(j.at("a")));
  if (k == "ln") return ln(expr_from_json(j.at("a")));
  if (k == "ipow")
    return pow_int(expr_from_json(j.at("a")), j.at("n").get<int>());
  const Expr a = expr_from_json(j.at("a"));
  const Expr b = expr_from_json(j.at("b"));
  if (k == "add") return a + b;
  if (k == "sub") return a - b;
  if (k == "mul") return a * b;
  if (k == "div") return a / b;
  throw Error("unknown expression kind '" + k + "'");
}

ordered_json prop_to_json(const Prop& p) {
  ordered_json j;
  auto parts = [&p] {
    ordered_json a = ordered_json::array();
    for (const Prop& q : p.parts()) a.push_back(prop_to_json(q));
    return a;
  };
  switch (p.kind()) {
    case Prop::Kind::kLit:
      j["k"] = "lit";
      j["b"] = p.boolean_id();
      break;
    case Prop::Kind::kNot: j["k"] = "not"; j["p"] = parts(); break;
    case Prop::Kind::kAnd: j["k"] = "and"; j["p"] = parts(); break;
    case Prop::Kind::kOr: j["k"] = "or"; j["p"] = parts(); break;
    case Prop::Kind::kXor: j["k"] = "xor"; j["p"] = parts(); break;
    case Prop::Kind::kImplies: j["k"] = "implies"; j["p"] = parts(); break;
    case Prop::Kind::kIff: j["k"] = "iff"; j["p"] = parts(); break;
    case Prop::Kind::kExactly:
      j["k"] = "exactly";
      j["m"] = p.exactly_count();
      j["ids"] = p.exactly_ids();
      break;
  }
  return j;
}

Prop prop_from_json(const ordered_json& j) {
  const std::string k = j.at("k").get<std::string>();
  if (k == "lit") return Prop::lit(j.at("b").get<int>());
  if (k == "exactly")
    return Prop::exactly(j.at("m").get<int>(),
                         j.at("ids").get<std::vector<int>>());
  std::vector<Prop> parts;
  for (const auto& q : j.at("p")) parts.push_back(prop_from_json(q));
  if (k == "not") return Prop::negate(std::move(parts[0]));
  if (k == "and") return Prop::conjunction(std::move(parts));
  if (k == "or") return Prop::disjunction(std::move(parts));
  if (k == "xor") return Prop::exclusive_or(std::move(parts));
  if (k == "implies")
    return Prop::implies(std::move(parts[0]), std::move(parts[1]));
  if (k == "iff") return Prop::iff(std::move(parts[0]), std::move(parts[1]));
  throw Error("unknown proposition kind '" + k + "'");
}

ordered_json constraint_to_json(const Constraint& c) {
  ordered_json j;
  j["body"] = expr_to_json(c.body);
  j["rel"] = c.relation == Relation::kEqualZero ? "eq0" : "le0";
  j["label"] = c.label;
  return j;
}

Constraint constraint_from_json(const ordered_json& j) {
  return {expr_from_json(j.at("body")),
          j.at("rel").get<std::string>() == "eq0" ? Relation::kEqualZero
                                                  : Relation::kLessEqualZero,
          j.at("label").get<std::string>()};
}

}  // namespace

std::string model_to_text(const Model& m) {
  ordered_json j;
  j["format"] = "gdp-model";
  j["version"] = 1;
  ordered_json vars = ordered_json::array();
  for (const ContinuousVar& v : m.continuous_vars()) {
    ordered_json jv;
    jv["name"] = v.name;
    jv["lb"] = v.lower;
    jv["ub"] = v.upper;
    if (v.initial) jv["init"] = *v.initial;
    vars.push_back(jv);
  }
  j["continuous"] = vars;
  ordered_json bools = ordered_json::array();
  for (const BooleanVar& b : m.boolean_vars()) {
    ordered_json jb;
    jb["name"] = b.name;
    if (b.fixed) jb["fixed"] = *b.fixed;
    bools.push_back(jb);
  }
  j["booleans"] = bools;
  ordered_json globals = ordered_json::array();
  for (const Constraint& c : m.global_constraints())
    globals.push_back(constraint_to_json(c));
  j["globals"] = globals;
  ordered_json djs = ordered_json::array();
  for (const Disjunction& dj : m.disjunctions()) {
    if (dj.removed) continue;
    ordered_json jd = ordered_json::array();
    for (const Disjunct& d : dj.disjuncts) {
      ordered_json di;
      di["indicator"] = d.indicator;
      ordered_json cs = ordered_json::array();
      for (const Constraint& c : d.constraints)
        cs.push_back(constraint_to_json(c));
      di["constraints"] = cs;
      jd.push_back(di);
    }
    djs.push_back(jd);
  }
  j["disjunctions"] = djs;
  ordered_json props = ordered_json::array();
  for (const Prop& p : m.logic_props()) props.push_back(prop_to_json(p));
  j["props"] = props;
  if (m.has_objective()) j["objective"] = expr_to_json(m.objective());
  return j.dump(2) + "\n";
}

Model model_from_text(const std::string& text) {
  const ordered_json j = ordered_json::parse(text);
  if (j.at("format").get<std::string>() != "gdp-model")
    throw Error("not a gdp-model document");
  Model m;
  for (const auto& jv : j.at("continuous")) {
    std::optional<double> init;
    if (jv.contains("init")) init = jv.at("init").get<double>();
    m.add_continuous(jv.at("name").get<std::string>(),
                     jv.at("lb").get<double>(), jv.at("ub").get<double>(),
                     init);
  }
  for (const auto& jb : j.at("booleans")) {
    const int id = m.add_boolean(jb.at("name").get<std::string>());
    if (jb.contains("fixed")) m.fix_boolean(id, jb.at("fixed").get<bool>());
  }
  for (const auto& jc : j.at("globals")) {
    const Constraint c = constraint_from_json(jc);
    m.add_global_constraint(c.body, c.relation, c.label);
  }
  for (const auto& jd : j.at("disjunctions")) {
    std::vector<Disjunct> disjuncts;
    for (const auto& di : jd) {
      Disjunct d;
      d.indicator = di.at("indicator").get<int>();
      for (const auto& jc : di.at("constraints"))
        d.constraints.push_back(constraint_from_json(jc));
      disjuncts.push_back(std::move(d));
    }
    m.add_disjunction(std::move(disjuncts));
  }
  for (const auto& jp : j.at("props")) m.add_logic_prop(prop_from_json(jp));
  if (j.contains("objective")) m.set_objective(expr_from_json(j.at("objective")));
  return m;
}

}  // namespace ldsda
