#pragma once

#include "etalab/chern.hpp"

namespace etalab::eta {

using chern::FormField;
using chern::GroupFamily;
using chern::HalfOpenFamily;
using chern::ParamDomain;
using suspend::HalfOpenElement;
using suspend::ProductSuspendedElement;
using suspend::SuspendedElement;

// Symmetric partie-finie extraction: fit T -> int_{-T}^{T} F against
// {1, log T, T^j, T^-j} over log-spaced truncation radii and keep the
// constant term. p_derivatives > 0 switches to the plain growth-only
// basis {1, log T, T^j j<=p} (cross-check mode, lower accuracy).
struct RegularizedTraceConfig {
  std::vector<double> radii;
  int max_power = 3;
  int neg_powers = 8;
  bool with_log = true;
  int p_derivatives = 0;
  double residual_tol = 1e-6;
  int panel_nodes = 16;
  double panel_width = 2.0;

  static RegularizedTraceConfig defaults(double L = 4.0);
};

Complex regularized_trace(const std::function<Complex(double)>& F,
                          const RegularizedTraceConfig& cfg);

// Shared-node variant: all components are integrated on one set of
// quadrature points and fitted independently.
std::vector<Complex> regularized_trace_multi(
    const std::function<void(double, std::vector<Complex>&)>& F, int n_comp,
    const RegularizedTraceConfig& cfg);

// Regularized trace of Tr(da/dtau).
Complex formal_trace(const ProductSuspendedElement& a,
                     const RegularizedTraceConfig& cfg);

struct EtaValue {
  ParamDomain dom;
  std::vector<Complex> eta0;      // scalar field over the domain
  std::vector<FormField> forms;   // degree-2 part when dim >= 2
};

// tau-resolved fibre given by closures; `value` returns the full matrix.
struct Fiber {
  std::function<Matrix(double)> value;
  std::function<Matrix(double)> dtau;
};

struct EvalFamily {
  ParamDomain dom;
  std::vector<Fiber> fibres;
  int N = 0;
};

EvalFamily make_eval_family(const ParamDomain& dom,
                            std::vector<ProductSuspendedElement> fibres);

// a(tau) = A(y) + i tau + q(tau, y) with Hermitian A and Schwartz q.
EvalFamily hermitian_eval_family(const ParamDomain& dom,
                                 const std::vector<Matrix>& A,
                                 const std::vector<SuspendedElement>& q);

EvalFamily pointwise_inverse(const EvalFamily& f);
EvalFamily pointwise_product(const EvalFamily& f, const EvalFamily& g);

EtaValue family_eta(const EvalFamily& f, const RegularizedTraceConfig& cfg);

// exp(2 pi i eta0), pointwise over the domain.
std::vector<Complex> tau_invariant(const EvalFamily& f,
                                   const RegularizedTraceConfig& cfg);

// max over gridpoints and degrees of |eta(f^-1) + eta(f)|
double eta_inverse_check(const EvalFamily& f,
                         const RegularizedTraceConfig& cfg);

struct MultiplicativityReport {
  double shift_residual;       // max |eta0(b) - eta0(a) - winding(b a^-1)|
  double deta_residual;        // sup-norm difference of d eta0 along the base
  double winding_integrality;  // max distance of the quotient winding from Z
};

// b must differ from a by a pointwise Schwartz loop factor.
MultiplicativityReport eta_multiplicativity_check(
    const EvalFamily& a, const EvalFamily& b, const suspend::GridPtr& grid,
    const RegularizedTraceConfig& cfg);

// Push-forward of the odd Chern form over tau for a half-open family;
// eta0 is convergent and needs no regularization here.
EtaValue universal_eta(const HalfOpenFamily& f);

// (exp(2 pi i eta0), det of the limit value); contract: equal.
std::pair<Complex, Complex> fredholm_relation_check(const HalfOpenElement& a);

}  // namespace etalab::eta
