#pragma once

#include <vector>

#include "ldsda/logic.hpp"
#include "ldsda/model.hpp"

namespace ldsda {

// An ordered Boolean vector reformulated as one integer external variable.
// Position a in [1, |booleans|] selects the a-th Boolean; neighbors are
// taken over positions, never over whatever labels the modeler used.
struct ExternalVarSpec {
  int index = 0;                // j, assigned at declaration
  std::vector<int> booleans;   // ordered Boolean ids, positions 1..n

  int lower() const { return 1; }
  int upper() const { return static_cast<int>(booleans.size()); }
};

// A lattice point z_E, one component per spec, 1-based positions.
using ExternalPoint = std::vector<int>;

// Registers an external variable over `booleans`. The model must contain an
// Exactly(1, exactly-this-set) proposition (the partitioning requirement);
// the list order is taken as the well-order.
ExternalVarSpec declare_external(const Model& m, std::vector<int> booleans);

// One candidate spec per live disjunction, ordered by disjunct position.
// Callers discard the ones that do not represent ordered decisions.
std::vector<ExternalVarSpec> auto_detect(const Model& m);

// Position z_j of spec j goes True, every other Boolean of that spec goes
// False; Booleans outside the specs stay Unknown. Throws OutOfBounds when a
// component leaves [1, |spec|].
Assignment fix_booleans(const std::vector<ExternalVarSpec>& specs,
                        const ExternalPoint& z, int num_booleans);

// Inverse of fix_booleans: reads the True position of each spec.
ExternalPoint read_point(const std::vector<ExternalVarSpec>& specs,
                         const Assignment& assignment);

bool in_box(const std::vector<ExternalVarSpec>& specs, const ExternalPoint& z);

// |lattice| = prod_j |spec_j|.
long lattice_size(const std::vector<ExternalVarSpec>& specs);

}  // namespace ldsda
