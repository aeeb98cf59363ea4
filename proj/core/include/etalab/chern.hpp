#pragma once

#include "etalab/suspend.hpp"

namespace etalab::chern {

using suspend::HalfOpenElement;
using suspend::SuspendedElement;

struct Axis {
  int n = 0;
  double length = 2 * kPi;
  bool periodic = true;
  double step() const { return periodic ? length / n : length / (n - 1); }
};

struct ParamDomain {
  std::vector<Axis> axes;

  int dim() const { return (int)axes.size(); }
  int size() const {
    int s = 1;
    for (const auto& a : axes) s *= a.n;
    return s;
  }
  std::vector<int> unflatten(int flat) const;
  int flatten(const std::vector<int>& idx) const;
  // neighbor along an axis; -1 when stepping off an interval end
  int shift(int flat, int axis, int delta) const;
  double coord(int flat, int axis) const;

  bool operator==(const ParamDomain& o) const;
};

enum class DerivMode { FiniteDifference, Spectral };

// Per-axis directional derivative of a grid field.
std::vector<Matrix> field_derivative(const ParamDomain& dom,
                                     const std::vector<Matrix>& field, int axis,
                                     DerivMode mode = DerivMode::FiniteDifference);
std::vector<Complex> field_derivative(const ParamDomain& dom,
                                      const std::vector<Complex>& field,
                                      int axis,
                                      DerivMode mode = DerivMode::FiniteDifference);

// Family of group elements over a gridded domain; `values` hold the full
// matrices Id + A. Analytic derivatives, when supplied, override the grid
// derivative provider.
struct GroupFamily {
  ParamDomain dom;
  std::vector<Matrix> values;
  DerivMode mode = DerivMode::FiniteDifference;
  std::vector<std::vector<Matrix>> analytic_derivs;  // [axis][gridpoint]

  int matrix_dim() const { return values.empty() ? 0 : (int)values[0].rows(); }
  std::vector<Matrix> axis_derivative(int axis) const;
  void validate(double margin_floor = kDefaultMarginFloor) const;
};

GroupFamily pointwise_family_inverse(const GroupFamily& f);
GroupFamily pointwise_family_product(const GroupFamily& f, const GroupFamily& g);

struct SuspendedFamily {
  ParamDomain dom;
  std::vector<SuspendedElement> fibres;
  DerivMode mode = DerivMode::FiniteDifference;
};

struct HalfOpenFamily {
  ParamDomain dom;
  std::vector<HalfOpenElement> fibres;
  DerivMode mode = DerivMode::FiniteDifference;
};

struct FormField {
  int degree = 0;
  ParamDomain dom;
  std::vector<std::vector<int>> tuples;      // sorted axis tuples
  std::vector<std::vector<Complex>> comps;   // [tuple][gridpoint]

  static FormField zero(int degree, const ParamDomain& dom);
  int tuple_index(const std::vector<int>& t) const;
  double norm_inf() const;
  // sup over the sublattice of points whose indices are multiples of stride;
  // lets refinement studies compare errors at common locations
  double norm_inf_strided(int stride) const;
  FormField& operator+=(const FormField& o);
  FormField& operator-=(const FormField& o);
  FormField& operator*=(Complex c);
};

FormField operator-(FormField a, const FormField& b);
FormField operator+(FormField a, const FormField& b);

// Chern coefficients c_k = k! / ((2 pi i)^(k+1) (2k+1)!)
Complex chern_coefficient(int k);

// Odd Chern character in form degrees 1 and 3 (3 only when dim >= 3).
std::vector<FormField> ch_odd(const GroupFamily& f);

// Even Chern character of a Schwartz suspended family: degrees 0 and 2.
std::vector<FormField> ch_even(const SuspendedFamily& f);

// Same tau push-forward for half-open fibres (the integrands still decay);
// degree 0 carries (1/2 pi i) int Tr(a^-1 da/dtau) dtau.
std::vector<FormField> tau_pushforward(const HalfOpenFamily& f);

double winding_number(const GroupFamily& loop);

FormField exterior_derivative(const FormField& w);

// Transgression between m*Ch_odd and the sum of pullbacks, via the rotation
// homotopy on the doubled model; involution-antisymmetrized. Degrees 0, 2.
std::vector<FormField> transgression_delta_even(const GroupFamily& a,
                                                const GroupFamily& b);

// Odd transgression for pairs of Schwartz suspended families; degree 1.
FormField transgression_delta_odd(const SuspendedFamily& a,
                                  const SuspendedFamily& b);
FormField transgression_delta_odd(const HalfOpenFamily& a,
                                  const HalfOpenFamily& b);

// Standard winding-w loop fixture s(tau) = Id + (e^{i w theta(tau)} - 1) P,
// theta = pi (1 + tanh tau), P = diag(1, 0, ...).
SuspendedElement winding_fixture(const suspend::GridPtr& grid, int N, int w);

// Gauss-Legendre nodes/weights on [a, b].
std::vector<std::pair<double, double>> gauss_legendre(int n, double a, double b);

}  // namespace etalab::chern
