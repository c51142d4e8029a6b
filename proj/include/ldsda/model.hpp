#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ldsda/expr.hpp"

namespace ldsda {

enum class Truth { kFalse, kTrue, kUnknown };

enum class Relation { kLessEqualZero, kEqualZero };

// Proposition tree over Boolean variable references. Exactly takes a plain
// list of Boolean ids; everything else composes subformulas.
class Prop {
 public:
  enum class Kind { kLit, kNot, kAnd, kOr, kXor, kImplies, kIff, kExactly };

  static Prop lit(int boolean_id);
  static Prop negate(Prop p);
  static Prop conjunction(std::vector<Prop> parts);
  static Prop disjunction(std::vector<Prop> parts);
  static Prop exclusive_or(std::vector<Prop> parts);
  static Prop implies(Prop antecedent, Prop consequent);
  static Prop iff(Prop a, Prop b);
  static Prop exactly(int count, std::vector<int> boolean_ids);

  Kind kind() const { return kind_; }
  int boolean_id() const { return boolean_id_; }
  int exactly_count() const { return exactly_count_; }
  const std::vector<int>& exactly_ids() const { return exactly_ids_; }
  const std::vector<Prop>& parts() const { return parts_; }

  // Largest Boolean id referenced, or -1.
  int max_boolean_id() const;

  std::string to_string(const std::vector<std::string>& names = {}) const;

 private:
  Prop() = default;
  Kind kind_ = Kind::kLit;
  int boolean_id_ = -1;
  int exactly_count_ = 0;
  std::vector<int> exactly_ids_;
  std::vector<Prop> parts_;
};

struct ContinuousVar {
  std::string name;
  double lower = 0.0;
  double upper = 0.0;
  std::optional<double> initial;
};

struct BooleanVar {
  std::string name;
  std::optional<bool> fixed;
};

struct Constraint {
  Expr body;
  Relation relation = Relation::kLessEqualZero;
  std::string label;
};

struct Disjunct {
  int indicator = -1;  // Boolean id
  std::vector<Constraint> constraints;
};

struct Disjunction {
  std::vector<Disjunct> disjuncts;
  bool removed = false;
};

struct ValidationIssue {
  enum class Code {
    kBoundsReversed,
    kNonFiniteBound,
    kSharedIndicator,
    kBadExactlyArity,
    kMissingObjective,
    kObjectiveBadReference,
    kConstraintBadReference,
  };
  Code code;
  std::string entity;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool passed() const { return issues.empty(); }
};

// Declarative GDP model: bounded continuous variables, Boolean variables,
// global constraints, disjunctions with Boolean indicators, and logic
// propositions. Built single-threaded, then frozen; frozen models are
// immutable and may be shared across threads.
class Model {
 public:
  int add_continuous(const std::string& name, double lower, double upper,
                     std::optional<double> initial = std::nullopt);
  int add_boolean(const std::string& name);
  void fix_boolean(int boolean_id, bool value);
  int add_global_constraint(Expr body, Relation relation,
                            const std::string& label = "");
  int add_disjunction(std::vector<Disjunct> disjuncts);
  void remove_disjunction(int disjunction_id);
  int add_logic_prop(Prop prop);
  void set_objective(Expr objective);  // minimization only
  void freeze();

  bool frozen() const { return frozen_; }
  int num_continuous() const { return static_cast<int>(continuous_.size()); }
  int num_booleans() const { return static_cast<int>(booleans_.size()); }
  const ContinuousVar& continuous(int id) const { return continuous_[id]; }
  const BooleanVar& boolean(int id) const { return booleans_[id]; }
  const std::vector<ContinuousVar>& continuous_vars() const { return continuous_; }
  const std::vector<BooleanVar>& boolean_vars() const { return booleans_; }
  const std::vector<Constraint>& global_constraints() const { return globals_; }
  const std::vector<Disjunction>& disjunctions() const { return disjunctions_; }
  const std::vector<Prop>& logic_props() const { return props_; }
  bool has_objective() const { return objective_.has_value(); }
  const Expr& objective() const { return *objective_; }

  int find_continuous(const std::string& name) const;  // -1 when absent
  int find_boolean(const std::string& name) const;

  // User propositions plus one implicit Exactly(1, indicators) per live
  // disjunction, in declaration order.
  std::vector<Prop> all_props() const;

  ValidationReport validate() const;

 private:
  void require_mutable() const;
  std::vector<ContinuousVar> continuous_;
  std::vector<BooleanVar> booleans_;
  std::vector<Constraint> globals_;
  std::vector<Disjunction> disjunctions_;
  std::vector<Prop> props_;
  std::optional<Expr> objective_;
  bool frozen_ = false;
};

// Report-form serialization; round-trips everything validate() looks at.
std::string model_to_text(const Model& m);
Model model_from_text(const std::string& text);

}  // namespace ldsda
