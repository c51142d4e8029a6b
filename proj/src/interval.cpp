#include "ldsda/interval.hpp"

namespace ldsda {

namespace {

constexpr double kInf = Interval::kInf;

// Sum with directed saturation so that inf + (-inf) picks the bound-safe side.
double add_lo(double x, double y) {
  if (x == -kInf || y == -kInf) return -kInf;
  if (x == kInf || y == kInf) return kInf;
  return x + y;
}
double add_hi(double x, double y) {
  if (x == kInf || y == kInf) return kInf;
  if (x == -kInf || y == -kInf) return -kInf;
  return x + y;
}

}  // namespace

double Interval::midpoint() const {
  if (is_empty()) return 0.0;
  if (lo == -kInf && hi == kInf) return 0.0;
  if (lo == -kInf) return hi;
  if (hi == kInf) return lo;
  return 0.5 * (lo + hi);
}

Interval operator+(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return {add_lo(a.lo, b.lo), add_hi(a.hi, b.hi)};
}

Interval operator-(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return {add_lo(a.lo, -b.hi), add_hi(a.hi, -b.lo)};
}

Interval operator-(const Interval& a) {
  if (a.is_empty()) return Interval::empty();
  return {-a.hi, -a.lo};
}

Interval operator*(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  const double cands[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  double lo = kInf, hi = -kInf;
  for (double c : cands) {
    // 0 * inf: no information, resolve conservatively.
    if (std::isnan(c)) return Interval::entire();
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {lo, hi};
}

Interval operator/(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  if (b.lo <= 0.0 && 0.0 <= b.hi) return Interval::entire();
  // Direct endpoint quotients: a point interval divides exactly the same
  // way scalar evaluation does.
  const double cands[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
  double lo = kInf, hi = -kInf;
  for (double c : cands) {
    if (std::isnan(c)) return Interval::entire();
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return {lo, hi};
}

Interval interval_exp(const Interval& a) {
  if (a.is_empty()) return Interval::empty();
  return {std::exp(a.lo), std::exp(a.hi)};
}

Interval interval_ln(const Interval& a) {
  if (a.is_empty()) return Interval::empty();
  if (a.hi <= 0.0) return Interval::empty();
  const double lo = a.lo <= 0.0 ? -kInf : std::log(a.lo);
  return {lo, std::log(a.hi)};
}

Interval interval_pow(const Interval& a, int exponent) {
  if (a.is_empty()) return Interval::empty();
  if (exponent == 0) return Interval::point(1.0);
  if (exponent < 0) return Interval::point(1.0) / interval_pow(a, -exponent);
  auto p = [exponent](double x) { return std::pow(x, exponent); };
  if (exponent % 2 != 0) return {p(a.lo), p(a.hi)};
  if (a.lo >= 0.0) return {p(a.lo), p(a.hi)};
  if (a.hi <= 0.0) return {p(a.hi), p(a.lo)};
  return {0.0, std::max(p(a.lo), p(a.hi))};
}

Interval intersect(const Interval& a, const Interval& b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  const Interval r{std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
  return r.is_empty() ? Interval::empty() : r;
}

Interval hull(const Interval& a, const Interval& b) {
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

}  // namespace ldsda
