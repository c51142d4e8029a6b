#include "ldsda/reformulate.hpp"

#include <algorithm>
#include <unordered_set>

#include "ldsda/errors.hpp"

namespace ldsda {

namespace {

bool has_exactly_one_over(const std::vector<Prop>& props,
                          const std::vector<int>& booleans) {
  std::unordered_set<int> wanted(booleans.begin(), booleans.end());
  for (const Prop& p : props) {
    if (p.kind() != Prop::Kind::kExactly || p.exactly_count() != 1) continue;
    const auto& ids = p.exactly_ids();
    if (ids.size() != wanted.size()) continue;
    if (std::all_of(ids.begin(), ids.end(),
                    [&](int id) { return wanted.count(id) > 0; }))
      return true;
  }
  return false;
}

}  // namespace

ExternalVarSpec declare_external(const Model& m, std::vector<int> booleans) {
  if (booleans.empty())
    throw DuplicateBoolean("external variable needs a nonempty Boolean list");
  std::unordered_set<int> seen;
  for (int id : booleans) {
    if (id < 0 || id >= m.num_booleans())
      throw UndeclaredVariable("Boolean id out of range");
    if (!seen.insert(id).second)
      throw DuplicateBoolean("Boolean '" + m.boolean(id).name +
                             "' repeated in external variable list");
  }
  if (!has_exactly_one_over(m.all_props(), booleans))
    throw MissingExactlyOne(
        "no Exactly(1, .) proposition over exactly the declared Booleans");
  ExternalVarSpec spec;
  spec.booleans = std::move(booleans);
  return spec;
}

std::vector<ExternalVarSpec> auto_detect(const Model& m) {
  std::vector<ExternalVarSpec> specs;
  for (const Disjunction& dj : m.disjunctions()) {
    if (dj.removed) continue;
    ExternalVarSpec spec;
    spec.index = static_cast<int>(specs.size());
    for (const Disjunct& d : dj.disjuncts) spec.booleans.push_back(d.indicator);
    specs.push_back(std::move(spec));
  }
  return specs;
}

Assignment fix_booleans(const std::vector<ExternalVarSpec>& specs,
                        const ExternalPoint& z, int num_booleans) {
  if (z.size() != specs.size())
    throw DimensionMismatch("point length does not match spec count");
  Assignment a(num_booleans, Truth::kUnknown);
  for (size_t j = 0; j < specs.size(); ++j) {
    const ExternalVarSpec& spec = specs[j];
    if (z[j] < spec.lower() || z[j] > spec.upper())
      throw OutOfBounds("component " + std::to_string(j + 1) + " = " +
                        std::to_string(z[j]) + " outside [1, " +
                        std::to_string(spec.upper()) + "]");
    for (int a_pos = 1; a_pos <= spec.upper(); ++a_pos)
      a[spec.booleans[a_pos - 1]] =
          (a_pos == z[j]) ? Truth::kTrue : Truth::kFalse;
  }
  return a;
}

ExternalPoint read_point(const std::vector<ExternalVarSpec>& specs,
                         const Assignment& assignment) {
  ExternalPoint z(specs.size(), 0);
  for (size_t j = 0; j < specs.size(); ++j) {
    for (int a_pos = 1; a_pos <= specs[j].upper(); ++a_pos) {
      if (assignment[specs[j].booleans[a_pos - 1]] == Truth::kTrue) {
        z[j] = a_pos;
        break;
      }
    }
  }
  return z;
}

bool in_box(const std::vector<ExternalVarSpec>& specs, const ExternalPoint& z) {
  if (z.size() != specs.size()) return false;
  for (size_t j = 0; j < specs.size(); ++j)
    if (z[j] < specs[j].lower() || z[j] > specs[j].upper()) return false;
  return true;
}

long lattice_size(const std::vector<ExternalVarSpec>& specs) {
  long n = 1;
  for (const ExternalVarSpec& s : specs) n *= s.upper();
  return n;
}

}  // namespace ldsda
