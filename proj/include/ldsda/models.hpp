#pragma once

#include <array>
#include <map>
#include <string>

#include "ldsda/reformulate.hpp"

namespace ldsda {

// Superstructure of `reactors` equal-volume CSTRs in series with a single
// recycle, autocatalytic A + B -> 2B. Units are numbered from the product
// end; the fresh feed always enters the top unit and passes through
// bypasses until it reaches the first installed reactor. The default
// parameters are synthetic but well-scaled; the file loader accepts other
// instances.
struct CstrParams {
  int reactors = 5;           // superstructure size R
  double rate_constant = 2.0;  // k in r_A * Q^2 = -k * F_A * F_B
  double feed_a = 1.0;        // F0_A [mol/s]
  double feed_b = 0.0;        // F0_B [mol/s]
  double feed_flow = 1.0;     // Q_F0 [volume/s]
  double purity = 0.95;       // product spec fraction of B
  double volume_max = 100.0;
  double flow_max = 10.0;
};

// Three-stage (mixer, reactor, centrifuge) batch plant with two products
// and 1..3 parallel units per stage, in the convexified log-transformed
// form. Defaults are synthetic; drop in another instance via the loader.
struct BatchParams {
  static constexpr int kProducts = 2;  // a, b
  static constexpr int kStages = 3;    // mixer, reactor, centrifuge
  static constexpr int kMaxUnits = 3;  // unit-count options 1..3

  double horizon = 10.0;
  std::array<double, kProducts> demand = {250.0, 150.0};
  // size_factor[i][j]: volume per unit batch of product i at stage j
  std::array<std::array<double, kStages>, kProducts> size_factor = {
      {{2.0, 3.0, 4.0}, {4.0, 6.0, 3.0}}};
  // proc_time[i][j]: processing time of product i at stage j [h]
  std::array<std::array<double, kStages>, kProducts> proc_time = {
      {{8.0, 20.0, 4.0}, {16.0, 4.0, 4.0}}};
  std::array<double, kStages> alpha = {0.25, 0.5, 0.34};
  std::array<double, kStages> beta = {0.6, 0.6, 0.6};
  double vol_min = 250.0;
  double vol_max = 2500.0;
  // Batch sizes are allowed within this factor below their volume-capped
  // maximum (log-space box width).
  double batch_span = 50.0;
};

struct BuiltGdp {
  Model model;
  std::vector<ExternalVarSpec> specs;
};

BuiltGdp build_cstr(const CstrParams& params);
BuiltGdp build_small_batch(const BatchParams& params);

// `key = value` lines, '#' starts a comment; returns the raw map.
std::map<std::string, std::string> read_params_file(const std::string& path);

// Overlay file values onto the defaults. Unknown keys throw InvalidParams,
// except the solver keys (kkt_tol, feas_tol, max_inner, max_outer) that the
// front end consumes separately.
CstrParams cstr_params_from(const std::map<std::string, std::string>& kv);
BatchParams batch_params_from(const std::map<std::string, std::string>& kv);

const std::array<std::string, 3>& batch_stage_names();

}  // namespace ldsda
