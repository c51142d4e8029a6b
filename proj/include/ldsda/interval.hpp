#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace ldsda {

// Closed interval over the extended reals. The empty interval is the
// canonical pair (+inf, -inf); every arithmetic operation propagates it.
// Plain floating-point arithmetic, no outward rounding: enclosures here
// back a pruning heuristic, not a verified computation.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static constexpr double kInf = std::numeric_limits<double>::infinity();

  static Interval empty() { return {kInf, -kInf}; }
  static Interval entire() { return {-kInf, kInf}; }
  static Interval point(double v) { return {v, v}; }

  bool is_empty() const { return !(lo <= hi); }
  bool contains(double v) const { return !is_empty() && lo <= v && v <= hi; }
  bool is_subset_of(const Interval& o) const {
    return is_empty() || (!o.is_empty() && o.lo <= lo && hi <= o.hi);
  }
  double width() const { return is_empty() ? 0.0 : hi - lo; }
  double midpoint() const;

  bool operator==(const Interval& o) const {
    return (is_empty() && o.is_empty()) || (lo == o.lo && hi == o.hi);
  }
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);

Interval interval_exp(const Interval& a);
Interval interval_ln(const Interval& a);
Interval interval_pow(const Interval& a, int exponent);
Interval intersect(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);

}  // namespace ldsda
