#include <cmath>

#include "doctest.h"
#include "etalab/eta.hpp"
#include "etalab/fixtures.hpp"

using namespace etalab;
using namespace etalab::eta;

namespace {
suspend::GridPtr grid() {
  static suspend::GridPtr g = suspend::TauGrid::make();
  return g;
}

RegularizedTraceConfig cfg() { return RegularizedTraceConfig::defaults(); }

ParamDomain trivial() { return ParamDomain{}; }

ParamDomain circle(int n) { return ParamDomain{{chern::Axis{n}}}; }

// lift of Id + s to an eval family over a trivial domain
EvalFamily loop_family(const ParamDomain& dom,
                       const suspend::SuspendedElement& s) {
  const int N = s.dim();
  std::vector<ProductSuspendedElement> fibres(dom.size());
  for (auto& f : fibres) {
    f.poly_coeffs = {Matrix::Identity(N, N)};
    f.schwartz_part = s;
  }
  return make_eval_family(dom, std::move(fibres));
}

Matrix well_separated_hermitian(int N, Rng& rng) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Matrix A = rng.hermitian(N, 1.0);
    auto ev = opcore::hermitian_spectrum(A);
    double m = 1e9;
    for (double l : ev) m = std::min(m, std::abs(l));
    if (m > 0.25) return A;
  }
  throw EtalabError("well_separated_hermitian: no candidate");
}
}  // namespace

TEST_CASE("regularized trace of a gaussian") {
  auto v = regularized_trace([](double t) { return Complex(std::exp(-t * t)); },
                             cfg());
  CHECK(std::abs(v - std::sqrt(kPi)) < 1e-10);
}

TEST_CASE("regularized trace of a lorentzian") {
  auto v = regularized_trace(
      [](double t) { return Complex(1.0 / (1.0 + t * t)); }, cfg());
  CHECK(std::abs(v - kPi) < 1e-8);
}

// constants hidden under polynomial growth are recovered only to the
// cancellation limit of the fit, so these bounds are far looser than the
// pure-decay oracles
TEST_CASE("partie finie discards polynomial growth") {
  auto v = regularized_trace(
      [](double t) { return Complex(t * t + std::exp(-t * t)); }, cfg());
  CHECK(std::abs(v - std::sqrt(kPi)) < 5e-3);
  auto c = regularized_trace([](double) { return Complex(1.0); }, cfg());
  CHECK(std::abs(c) < 1e-5);
}

TEST_CASE("partie finie keeps the finite part of a mixed integrand") {
  // int_{-T}^{T} (1 + 1/(1+t^2)) = 2T + 2 arctan T -> finite part pi
  auto v = regularized_trace(
      [](double t) { return Complex(1.0 + 1.0 / (1.0 + t * t)); }, cfg());
  CHECK(std::abs(v - kPi) < 1e-6);
}

TEST_CASE("fit rejects integrands outside the model class") {
  CHECK_THROWS_AS(
      regularized_trace([](double t) { return Complex(std::cos(3.0 * t)); },
                        cfg()),
      EtalabError);
}

TEST_CASE("growth-only basis agrees on polynomial plus schwartz input") {
  auto c = cfg();
  c.p_derivatives = 3;
  c.residual_tol = 1e-2;
  auto v = regularized_trace(
      [](double t) { return Complex(0.5 * t * t + std::exp(-t * t)); }, c);
  CHECK(std::abs(v - std::sqrt(kPi)) < 1e-3);
}

TEST_CASE("formal trace vanishes on derivative-like input") {
  Rng rng(101, "eta-formal");
  const int N = 3;
  ProductSuspendedElement a;
  a.poly_coeffs = {rng.hermitian(N), kI * Matrix::Identity(N, N),
                   0.1 * rng.hermitian(N)};
  a.schwartz_part = fixtures::random_suspended(grid(), N, rng);
  CHECK(std::abs(formal_trace(a, cfg())) < 1e-5);
}

TEST_CASE("scalar eta oracle") {
  for (double lambda : {0.7, -0.7, 1.9}) {
    auto f = hermitian_eval_family(trivial(), {lambda * Matrix::Identity(1, 1)},
                                   {});
    auto e = family_eta(f, cfg());
    CHECK(std::abs(e.eta0[0] - 0.5 * (lambda > 0 ? 1.0 : -1.0)) < 1e-6);
  }
}

TEST_CASE("hermitian eta counts signs of eigenvalues") {
  Rng rng(103, "eta-hermitian");
  for (int rep = 0; rep < 3; ++rep) {
    const int N = 2 + rep;
    Matrix A = well_separated_hermitian(N, rng);
    double expect = 0;
    for (double l : opcore::hermitian_spectrum(A))
      expect += 0.5 * (l > 0 ? 1.0 : -1.0);
    auto e = family_eta(hermitian_eval_family(trivial(), {A}, {}), cfg());
    CHECK(std::abs(e.eta0[0] - expect) < 1e-4);
  }
}

TEST_CASE("tau invariant is a sign") {
  auto plus = tau_invariant(
      hermitian_eval_family(trivial(), {0.8 * Matrix::Identity(1, 1)}, {}),
      cfg());
  CHECK(std::abs(plus[0] - Complex(-1.0)) < 1e-6);
  Matrix A = Matrix::Zero(2, 2);
  A(0, 0) = 1.1;
  A(1, 1) = -0.9;
  auto both = tau_invariant(hermitian_eval_family(trivial(), {A}, {}), cfg());
  CHECK(std::abs(both[0] - Complex(1.0)) < 1e-6);
}

TEST_CASE("tau invariant does not depend on the perturbation section") {
  Rng rng(104, "eta-tau-section");
  const int N = 3;
  Matrix A = well_separated_hermitian(N, rng);
  auto q1 = fixtures::random_suspended(grid(), N, rng, 0.1);
  auto q2 = fixtures::random_suspended(grid(), N, rng, 0.1);
  auto t0 = tau_invariant(hermitian_eval_family(trivial(), {A}, {}), cfg());
  auto t1 = tau_invariant(hermitian_eval_family(trivial(), {A}, {q1}), cfg());
  auto t2 = tau_invariant(hermitian_eval_family(trivial(), {A}, {q2}), cfg());
  MESSAGE("tau sections: " << std::abs(t1[0] - t2[0]) << " "
                           << std::abs(t1[0] - t0[0]));
  CHECK(std::abs(t1[0] - t2[0]) < 1e-8);
  CHECK(std::abs(t1[0] - t0[0]) < 1e-8);
}

TEST_CASE("eta of the inverse is minus eta") {
  Rng rng(105, "eta-inverse");
  const int N = 2;
  Matrix A = well_separated_hermitian(N, rng);
  auto q = fixtures::random_suspended(grid(), N, rng, 0.1);
  auto f = hermitian_eval_family(trivial(), {A}, {q});
  CHECK(eta_inverse_check(f, cfg()) < 1e-8);
}

TEST_CASE("universal eta of a winding loop") {
  for (int w : {-1, 0, 2}) {
    chern::HalfOpenFamily f;
    f.dom = trivial();
    f.fibres = {suspend::embed(chern::winding_fixture(grid(), 2, w))};
    auto e = universal_eta(f);
    CHECK(std::abs(e.eta0[0] - double(w)) < 1e-6);
  }
}

TEST_CASE("universal eta restricts to the even chern character") {
  Rng rng(106, "eta-universal");
  auto dom = circle(12);
  auto s = fixtures::random_suspended_family(dom, grid(), 2, rng);
  chern::HalfOpenFamily emb;
  emb.dom = dom;
  for (const auto& fib : s.fibres) emb.fibres.push_back(suspend::embed(fib));
  auto e = universal_eta(emb);
  auto ch = chern::ch_even(s);
  double r = 0;
  for (int p = 0; p < dom.size(); ++p)
    r = std::max(r, std::abs(e.eta0[p] - ch[0].comps[0][p]));
  CHECK(r < 1e-7);
}

TEST_CASE("universal eta transgresses the limit chern form") {
  double res[2];
  for (int k = 0; k < 2; ++k) {
    Rng local(107, "eta-transgression");
    auto dom = circle(16 << k);
    auto f = fixtures::random_half_open_family(dom, grid(), 2, local);
    auto e = universal_eta(f);
    auto de = chern::field_derivative(dom, e.eta0, 0);
    chern::GroupFamily lim;
    lim.dom = dom;
    lim.mode = chern::DerivMode::Spectral;
    for (const auto& fib : f.fibres)
      lim.values.push_back(suspend::restrict_infinity(fib).full());
    auto ch = chern::ch_odd(lim);
    double r = 0;
    for (int p = 0; p < dom.size(); ++p)
      r = std::max(r, std::abs(de[p] - ch[0].comps[0][p]));
    res[k] = r;
  }
  MESSAGE("transgression residuals: " << res[0] << " " << res[1]);
  CHECK(res[0] / res[1] > 3.0);
}

TEST_CASE("fredholm relation on random half-open paths") {
  Rng rng(108, "eta-fredholm");
  for (int rep = 0; rep < 5; ++rep) {
    auto a = fixtures::random_half_open(grid(), 2 + rep % 3, rng);
    auto [lhs, rhs] = fredholm_relation_check(a);
    CHECK(std::abs(lhs - rhs) < 1e-8 * std::abs(rhs));
  }
}

TEST_CASE("left multiplication by a winding loop shifts eta") {
  Rng rng(109, "eta-mult");
  auto dom = circle(12);
  const int N = 2;
  Matrix H1 = 0.2 * rng.hermitian(N);
  Matrix H2 = 0.2 * rng.hermitian(N);
  std::vector<Matrix> A(dom.size());
  for (int p = 0; p < dom.size(); ++p) {
    const double y = dom.coord(p, 0);
    A[p] = Matrix::Zero(N, N);
    A[p](0, 0) = 1.2;
    A[p](1, 1) = -1.4;
    A[p] += std::cos(y) * H1 + std::sin(y) * H2;
  }
  auto a = hermitian_eval_family(dom, A, {});
  auto loop = loop_family(dom, chern::winding_fixture(grid(), N, 1));
  auto b = pointwise_product(loop, a);
  auto rep = eta_multiplicativity_check(a, b, grid(), cfg());
  MESSAGE("multiplicativity: shift " << rep.shift_residual << ", deta "
                                     << rep.deta_residual << ", winding "
                                     << rep.winding_integrality);
  CHECK(rep.winding_integrality < 1e-6);
  CHECK(rep.shift_residual < 1e-5);
  CHECK(rep.deta_residual < 1e-4);
}
