#include <cmath>

#include "doctest.h"
#include "etalab/fixtures.hpp"

using namespace etalab;
using namespace etalab::chern;

namespace {
suspend::GridPtr grid() {
  static suspend::GridPtr g = suspend::TauGrid::make();
  return g;
}

ParamDomain circle(int n) { return ParamDomain{{Axis{n}}}; }
ParamDomain torus2(int n) { return ParamDomain{{Axis{n}, Axis{n}}}; }
ParamDomain torus3(int n) { return ParamDomain{{Axis{n}, Axis{n}, Axis{n}}}; }

GroupFamily strip_analytic(GroupFamily f, DerivMode mode) {
  f.analytic_derivs.clear();
  f.mode = mode;
  return f;
}
}  // namespace

TEST_CASE("chern coefficients") {
  CHECK(std::abs(chern_coefficient(0) - 1.0 / kTwoPiI) < 1e-15);
  CHECK(std::abs(chern_coefficient(1) - 1.0 / (6.0 * kTwoPiI * kTwoPiI)) <
        1e-15);
}

TEST_CASE("fibrewise winding of the standard fixtures") {
  for (int w : {-2, -1, 0, 1, 2}) {
    auto s = winding_fixture(grid(), 3, w);
    SuspendedFamily fam;
    fam.dom = ParamDomain{};
    fam.fibres = {s};
    auto ch = ch_even(fam);
    CHECK(std::abs(ch[0].comps[0][0] - double(w)) < 1e-6);
  }
}

TEST_CASE("loop winding is integral and additive") {
  Rng rng(21, "chern-winding");
  auto dom = circle(256);
  for (int rep = 0; rep < 3; ++rep) {
    const int wa = rng.uniform_int(-2, 2), wb = rng.uniform_int(-2, 2);
    auto a = fixtures::random_group_family(dom, 4, rng, 0.25, wa);
    auto b = fixtures::random_group_family(dom, 4, rng, 0.25, wb);
    const double va = winding_number(a);
    const double vb = winding_number(b);
    CHECK(std::abs(va - wa) < 1e-6);
    CHECK(std::abs(vb - wb) < 1e-6);
    const double vab = winding_number(pointwise_family_product(a, b));
    CHECK(std::lround(vab) == wa + wb);
    CHECK(std::abs(vab - std::lround(vab)) < 1e-6);
  }
}

TEST_CASE("winding without analytic derivatives uses the spectral provider") {
  Rng rng(22, "chern-winding-spectral");
  auto f = fixtures::random_group_family(circle(256), 3, rng, 0.25, 1);
  auto g = strip_analytic(f, DerivMode::Spectral);
  CHECK(std::abs(winding_number(g) - 1.0) < 1e-6);
}

TEST_CASE("analytic, spectral, and finite-difference derivatives agree") {
  Rng rng(23, "chern-derivs");
  auto f = fixtures::random_group_family(circle(64), 3, rng, 0.25, 0);
  auto spec = field_derivative(f.dom, f.values, 0, DerivMode::Spectral);
  auto fd = field_derivative(f.dom, f.values, 0, DerivMode::FiniteDifference);
  double err_spec = 0, err_fd = 0;
  for (int p = 0; p < f.dom.size(); ++p) {
    err_spec = std::max(
        err_spec, (spec[p] - f.analytic_derivs[0][p]).cwiseAbs().maxCoeff());
    err_fd = std::max(err_fd,
                      (fd[p] - f.analytic_derivs[0][p]).cwiseAbs().maxCoeff());
  }
  CHECK(err_spec < 1e-10);
  CHECK(err_fd < 5e-3);
  CHECK(err_fd > err_spec);
}

TEST_CASE("exterior derivative squares to zero") {
  Rng rng(25, "chern-dd");
  auto dom = torus3(12);
  FormField f = FormField::zero(1, dom);
  for (auto& comp : f.comps)
    for (auto& v : comp) v = rng.complex_gaussian();
  FormField ddf = exterior_derivative(exterior_derivative(f));
  CHECK(ddf.norm_inf() < 1e-12);
}

TEST_CASE("odd chern character is closed at second order") {
  Rng rng(26, "chern-closed");
  double res[2];
  for (int k = 0; k < 2; ++k) {
    Rng local(26, "chern-closed-family");
    auto f = fixtures::random_group_family(torus2(16 << k), 3, local, 0.25, 0);
    auto ch = ch_odd(strip_analytic(f, DerivMode::FiniteDifference));
    res[k] = exterior_derivative(ch[0]).norm_inf();
  }
  CHECK(res[0] / res[1] > 3.0);
}

TEST_CASE("even chern character is closed at second order") {
  double res[2];
  for (int k = 0; k < 2; ++k) {
    Rng local(27, "chern-even-closed");
    auto f =
        fixtures::random_suspended_family(torus3(16 << k), grid(), 2, local);
    auto ch = ch_even(f);
    res[k] = exterior_derivative(ch[1]).norm_inf();
  }
  CHECK(res[0] / res[1] > 3.0);
}

TEST_CASE("degree-1 odd chern is strictly additive") {
  Rng rng(28, "chern-add");
  auto dom = torus2(10);
  auto a = fixtures::random_group_family(dom, 3, rng, 0.25, 0);
  auto b = fixtures::random_group_family(dom, 3, rng, 0.25, 0);
  auto ab = pointwise_family_product(a, b);
  FormField res = ch_odd(ab)[0] - ch_odd(a)[0] - ch_odd(b)[0];
  CHECK(res.norm_inf() < 1e-11);
}

TEST_CASE("rotation transgression matches the degree-3 product defect") {
  double res[2];
  double scale[2];
  for (int k = 0; k < 2; ++k) {
    Rng local(29, "chern-delta-even");
    auto dom = torus3(16 << k);
    auto a = fixtures::random_group_family(dom, 2, local, 0.3, 0);
    auto b = fixtures::random_group_family(dom, 2, local, 0.3, 0);
    auto ab = pointwise_family_product(a, b);
    FormField lhs = ch_odd(ab)[1] - ch_odd(a)[1] - ch_odd(b)[1];
    auto delta = transgression_delta_even(a, b);
    FormField rhs = exterior_derivative(delta[1]);
    scale[k] = lhs.norm_inf();
    res[k] = (lhs - rhs).norm_inf();
    MESSAGE("delta_even: |lhs| = " << scale[k] << ", residual = " << res[k]);
  }
  CHECK(scale[1] > 1e-6);           // the defect is genuinely nonzero
  CHECK(res[1] < 0.15 * scale[1]);  // and the transgression accounts for it
  CHECK(res[0] / res[1] > 3.0);     // at second order
}

TEST_CASE("odd transgression matches the degree-2 product defect") {
  double res[2], scale[2];
  for (int k = 0; k < 2; ++k) {
    Rng local(30, "chern-delta-odd");
    auto dom = torus2(16 << k);
    auto a = fixtures::random_suspended_family(dom, grid(), 2, local);
    auto b = fixtures::random_suspended_family(dom, grid(), 2, local);
    SuspendedFamily ab;
    ab.dom = dom;
    ab.fibres.resize(dom.size());
    for (int p = 0; p < dom.size(); ++p)
      ab.fibres[p] = suspend::pointwise_compose(a.fibres[p], b.fibres[p]);
    FormField lhs = ch_even(ab)[1] - ch_even(a)[1] - ch_even(b)[1];
    FormField rhs = exterior_derivative(transgression_delta_odd(a, b));
    scale[k] = lhs.norm_inf();
    res[k] = (lhs - rhs).norm_inf();
    MESSAGE("delta_odd: |lhs| = " << scale[k] << ", residual = " << res[k]);
  }
  CHECK(scale[1] > 1e-6);
  CHECK(res[1] < 0.15 * scale[1]);
  CHECK(res[0] / res[1] > 3.0);
}

TEST_CASE("tau pushforward extends ch_even to half-open families") {
  Rng rng(31, "chern-pushforward");
  auto dom = circle(16);
  auto s = fixtures::random_suspended_family(dom, grid(), 2, rng);
  chern::HalfOpenFamily emb;
  emb.dom = dom;
  for (const auto& fib : s.fibres) emb.fibres.push_back(suspend::embed(fib));
  auto a = ch_even(s);
  auto b = tau_pushforward(emb);
  CHECK((a[0] - b[0]).norm_inf() < 1e-9);
}
