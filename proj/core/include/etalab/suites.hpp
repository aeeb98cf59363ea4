#pragma once

#include "etalab/serialize.hpp"

namespace etalab::suites {

struct RunConfig {
  int N = 3;
  int n_nodes = 128;
  double L = 4.0;
  double tail_tol = kDefaultTailTol;
  double margin_floor = kDefaultMarginFloor;
  double grid_scale = 1.0;  // multiplies the base-domain resolutions
  std::uint64_t seed = 1;
  adiabatic::BracketMode bracket = adiabatic::BracketMode::Td9;
};

// name: chern | eta | adiabatic | bundles | all
serialize::Report run_suite(const std::string& name, const RunConfig& cfg);

// quantity: eta0 | winding | det_ad | index. The fixture file holds an
// odd family (eta0, winding, index) or an epsilon element (det_ad).
serialize::Report compute(const std::string& quantity,
                          const std::string& fixture_path,
                          const RunConfig& cfg);

}  // namespace etalab::suites
