#pragma once

#include "etalab/adiabatic.hpp"
#include "etalab/bundles.hpp"

namespace etalab::fixtures {

using adiabatic::BiGrid;
using adiabatic::EpsilonElement;
using chern::GroupFamily;
using chern::HalfOpenFamily;
using chern::ParamDomain;
using chern::SuspendedFamily;
using suspend::GridPtr;
using suspend::HalfOpenElement;
using suspend::SuspendedElement;

// Gaussian-bump Schwartz loop with a safeguarded margin.
SuspendedElement random_suspended(const GridPtr& grid, int N, Rng& rng,
                                  double amp = 0.35, int bumps = 3);

// Smooth group family over a (periodic-axis) domain with analytic
// derivatives; winding applies a diag(e^{i w theta}, 1, ...) phase along
// axis 0.
GroupFamily random_group_family(const ParamDomain& dom, int N, Rng& rng,
                                double amp = 0.25, int winding = 0);

// Suspended family with coefficients varying smoothly over the domain.
SuspendedFamily random_suspended_family(const ParamDomain& dom,
                                        const GridPtr& grid, int N, Rng& rng,
                                        double amp = 0.3);

// Half-open family: ramp path to a smooth invertible limit, optionally
// multiplied by a Schwartz loop family (the limit is unchanged).
HalfOpenFamily random_half_open_family(const ParamDomain& dom,
                                       const GridPtr& grid, int N, Rng& rng,
                                       double amp = 0.3, bool with_loop = false);

HalfOpenElement random_half_open(const GridPtr& grid, int N, Rng& rng,
                                 double amp = 0.4);

EpsilonElement random_schwartz_eps(const BiGrid& grid, int N, Rng& rng,
                                   double amp = 0.3, bool unital = true);
EpsilonElement random_extended_eps(const BiGrid& grid, int N, Rng& rng,
                                   double amp = 0.3);
EpsilonElement random_dclass_eps(const BiGrid& grid, int N, int j, Rng& rng,
                                 double amp = 0.25);

// extended elements with coefficients smooth over the domain
std::vector<EpsilonElement> random_extended_family(const ParamDomain& dom,
                                                   const BiGrid& grid, int N,
                                                   Rng& rng, double amp = 0.25);

bundles::OddFamily random_odd_family(const ParamDomain& base,
                                     const GridPtr& grid, int N, Rng& rng,
                                     double spread = 1.0);

}  // namespace etalab::fixtures
