#pragma once

#include "etalab/chern.hpp"

namespace etalab::adiabatic {

using chern::FormField;
using chern::ParamDomain;
using suspend::GridPtr;
using suspend::SuspendedElement;

struct BiGrid {
  GridPtr t, tau;

  static BiGrid make(int nt = 48, int ntau = 48, double L = 4.0,
                     double tail_tol = kDefaultTailTol);
  int size() const { return t->n() * tau->n(); }
  int index(int it, int jt) const { return it * tau->n() + jt; }
  bool operator==(const BiGrid& o) const { return t == o.t && tau == o.tau; }
};

enum class EpsClass { Schwartz, HalfOpenT, DClass };
enum class BracketMode { Td9, Verbatim };

// Symbol a0 + eps a1 on the BiGrid. Stored fields are the decaying parts;
// `unital` marks group elements Id + (a0 + eps a1). left0/right0 hold the
// t -> -/+infinity limits of a0 per tau node (zero for the Schwartz class;
// s^j - Id on the left for the D class).
struct EpsilonElement {
  BiGrid grid;
  int N = 0;
  bool unital = false;
  std::vector<Matrix> a0, a1;  // [index(it, jt)]
  EpsClass cls = EpsClass::Schwartz;
  int j = 0;
  std::vector<Matrix> left0, right0;  // [jt]

  static EpsilonElement identity(const BiGrid& g, int N);
  void validate(double margin_floor = kDefaultMarginFloor) const;

  // derivative fields of a0, honoring the t-limits
  std::vector<Matrix> dt0() const;
  std::vector<Matrix> dtau0() const;
};

EpsilonElement star_multiply(const EpsilonElement& a, const EpsilonElement& b,
                             BracketMode mode = BracketMode::Td9);
EpsilonElement star_inverse(const EpsilonElement& a,
                            BracketMode mode = BracketMode::Td9);

// linear-space operations on the stored fields (for paths and derivatives)
EpsilonElement eps_add(const EpsilonElement& a, const EpsilonElement& b,
                       Complex ca = 1.0, Complex cb = 1.0);
EpsilonElement eps_scale(const EpsilonElement& a, Complex c);

Complex adiabatic_trace(const EpsilonElement& a);

// (Tr_ad(a*b - b*a), boundary-slice integral); contract: equal
std::pair<Complex, Complex> trace_defect(const EpsilonElement& a,
                                         const EpsilonElement& b,
                                         BracketMode mode = BracketMode::Td9);

// alpha (plain) and alpha-tilde (symmetrized) per direction
std::vector<Complex> alpha_form(const EpsilonElement& a,
                                const std::vector<EpsilonElement>& da,
                                bool symmetrized,
                                BracketMode mode = BracketMode::Td9);

struct DetPathOptions {
  int init_steps = 12;
  int max_doublings = 6;
  double tol = 1e-8;
  double fd_step = 1e-4;
};

// exp of the alpha line integral along a path gamma: [0,1] -> epsilon group
Complex adiabatic_determinant(const std::function<EpsilonElement(double)>& path,
                              BracketMode mode = BracketMode::Td9,
                              const DetPathOptions& opts = {});

// straight-line path Id -> g in the stored fields, with a random-midpoint
// fallback when invertibility is lost along the way
Complex adiabatic_determinant(const EpsilonElement& g,
                              BracketMode mode = BracketMode::Td9,
                              std::uint64_t seed = 11,
                              const DetPathOptions& opts = {});

// delta(a, b) for boundary loops and one directional variation of each;
// all four arguments are full-loop data: value = Id + element samples.
Complex delta_correction(const SuspendedElement& a, const SuspendedElement& da,
                         const SuspendedElement& b, const SuspendedElement& db);

// Extended-class family over a 2-axis domain: (d alpha-tilde, 2 pi i times
// the degree-2 even Chern form of the boundary family).
std::pair<FormField, FormField> curvature_check(
    const ParamDomain& dom, const std::vector<EpsilonElement>& family,
    BracketMode mode = BracketMode::Td9);

struct GerbeReport {
  double splitting_residual;  // degree-2 identity with the d(delta'_1) term
  double curving_residual;    // || d eta2 - (Ch_odd)_3 of the limit family ||
};

// a and b must have pointwise equal limit values (fibre-product constraint);
// splitting is checked on 2-axis domains, curving on 3-axis ones.
GerbeReport gerbe_bfield_check(const chern::HalfOpenFamily& a,
                               const chern::HalfOpenFamily& b);

}  // namespace etalab::adiabatic
