#pragma once

#include "etalab/eta.hpp"

namespace etalab::bundles {

using chern::GroupFamily;
using chern::ParamDomain;
using suspend::GridPtr;
using suspend::SuspendedElement;

// Self-adjoint model family over a base domain: fibre a(tau) = A(y) + i tau.
struct OddFamily {
  ParamDomain base;
  std::vector<Matrix> A;  // Hermitian, per gridpoint
  GridPtr grid;           // tau grid for sections

  int dim() const { return A.empty() ? 0 : (int)A[0].rows(); }
  void validate(double herm_tol = 1e-12) const;
  double ellipticity_witness() const;  // min margin at the outermost tau nodes
};

struct PerturbationSection {
  std::vector<SuspendedElement> q;  // per gridpoint, Schwartz in tau
  double margin = 0;                // min over (y, tau) of smin(A + i tau + q)

  void recompute_margin(const OddFamily& F);
};

PerturbationSection make_invertible_perturbation(const OddFamily& F,
                                                 std::uint64_t seed);

// family of tau-loops q12 with Id + q12 = (A + i tau + q1)(A + i tau + q2)^-1
chern::SuspendedFamily transition(const OddFamily& F,
                                  const PerturbationSection& q1,
                                  const PerturbationSection& q2);

// s acts fibrewise: new values s (A + i tau + q); s is a Schwartz loop family
PerturbationSection left_action(const OddFamily& F,
                                const chern::SuspendedFamily& s,
                                const PerturbationSection& q);

// y-independent loop acting at every gridpoint
PerturbationSection left_action(const OddFamily& F, const SuspendedElement& s,
                                const PerturbationSection& q);

eta::EvalFamily section_family(const OddFamily& F,
                               const PerturbationSection& q);

struct Delooping {
  chern::HalfOpenFamily Q;
  GroupFamily index_section;  // g(y) = limit value of Q at +infinity
};

Delooping delooping_section(const OddFamily& F, const PerturbationSection& q,
                            const suspend::PathOptions& opts = {});

struct IndexCheck {
  double lhs;          // loop integral of the basic degree-1 form
  double rhs;          // minus the winding of the index section
  double tau_winding;  // phase winding of the tau invariant over the loop
  double basicness;    // lhs difference across two independent sections
};

IndexCheck index_theorem_check(const OddFamily& F, std::uint64_t seed,
                               const eta::RegularizedTraceConfig& cfg);

}  // namespace etalab::bundles
