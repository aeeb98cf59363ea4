#include <cmath>

#include "doctest.h"
#include "etalab/fixtures.hpp"

using namespace etalab;
using namespace etalab::bundles;

namespace {
suspend::GridPtr grid() {
  static suspend::GridPtr g = suspend::TauGrid::make();
  return g;
}

ParamDomain trivial() { return ParamDomain{}; }
ParamDomain circle(int n) { return ParamDomain{{chern::Axis{n}}}; }

OddFamily scalar_family(const ParamDomain& base, double lambda) {
  OddFamily f;
  f.base = base;
  f.grid = grid();
  f.A.assign(std::max(base.size(), 1), lambda * Matrix::Identity(1, 1));
  return f;
}
}  // namespace

TEST_CASE("invertible perturbation repairs a kernel crossing") {
  // A = 0 is singular at tau = 0 without the section
  auto f = scalar_family(circle(8), 0.0);
  auto q = make_invertible_perturbation(f, 5);
  CHECK(q.margin > 0.025);
  for (const auto& s : q.q) s.validate();
}

TEST_CASE("perturbation stays small away from the kernel") {
  auto f = scalar_family(trivial(), 0.5);
  auto q = make_invertible_perturbation(f, 6);
  CHECK(q.margin > 0.4);
}

TEST_CASE("perturbation margin on random odd families") {
  Rng rng(300, "bundles-margin");
  for (int rep = 0; rep < 3; ++rep) {
    auto f = fixtures::random_odd_family(circle(8), grid(), 3, rng);
    auto q = make_invertible_perturbation(f, 50 + rep);
    CHECK(q.margin > 0.025);
    double m = q.margin;
    q.recompute_margin(f);
    CHECK(q.margin == doctest::Approx(m));
  }
}

TEST_CASE("transition cocycle") {
  Rng rng(301, "bundles-cocycle");
  auto f = fixtures::random_odd_family(circle(8), grid(), 3, rng);
  auto q1 = make_invertible_perturbation(f, 61);
  auto q2 = make_invertible_perturbation(f, 62);
  auto q3 = make_invertible_perturbation(f, 63);
  auto t12 = transition(f, q1, q2);
  auto t23 = transition(f, q2, q3);
  auto t13 = transition(f, q1, q3);
  const Matrix id = Matrix::Identity(3, 3);
  double res = 0, self = 0, scale = 0;
  auto tqq = transition(f, q1, q1);
  for (int p = 0; p < f.base.size(); ++p)
    for (int j = 0; j < grid()->n(); ++j) {
      Matrix lhs = (id + t12.fibres[p].samples[j]) *
                       (id + t23.fibres[p].samples[j]) -
                   id;
      res = std::max(
          res, (lhs - t13.fibres[p].samples[j]).cwiseAbs().maxCoeff());
      self = std::max(self, tqq.fibres[p].samples[j].cwiseAbs().maxCoeff());
      scale = std::max(scale, t12.fibres[p].samples[j].cwiseAbs().maxCoeff());
    }
  CHECK(scale > 1e-4);  // the sections genuinely differ
  CHECK(res < 1e-10);
  CHECK(self < 1e-12);
}

TEST_CASE("left action by a winding loop shifts eta by the winding") {
  Rng rng(302, "bundles-action");
  auto cfg = eta::RegularizedTraceConfig::defaults();
  auto f = fixtures::random_odd_family(trivial(), grid(), 3, rng);
  auto q = make_invertible_perturbation(f, 70);
  const double base_eta = eta::family_eta(section_family(f, q), cfg).eta0[0].real();
  for (int w : {-2, -1, 1, 2}) {
    auto s = chern::winding_fixture(grid(), 3, w);
    auto qs = left_action(f, s, q);
    const double shifted =
        eta::family_eta(section_family(f, qs), cfg).eta0[0].real();
    CHECK(std::lround(shifted - base_eta) == w);
    CHECK(std::abs(shifted - base_eta - w) < 1e-4);
  }
}

TEST_CASE("delooping section has the cayley limit") {
  Rng rng(303, "bundles-deloop");
  auto f = fixtures::random_odd_family(circle(48), grid(), 3, rng);
  auto q = make_invertible_perturbation(f, 80);
  auto d = delooping_section(f, q);
  for (int p = 0; p < f.base.size(); ++p) {
    d.Q.fibres[p].validate();
    Matrix g = suspend::restrict_infinity(d.Q.fibres[p]).full();
    CHECK((g - d.index_section.values[p]).cwiseAbs().maxCoeff() < 1e-10);
    // Cayley comparison is unitary
    CHECK((g * g.adjoint() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() <
          1e-12);
  }
  const double w = chern::winding_number(d.index_section);
  CHECK(std::abs(w - std::lround(w)) < 1e-6);
}

TEST_CASE("index theorem on the circle") {
  Rng rng(304, "bundles-index");
  auto cfg = eta::RegularizedTraceConfig::defaults();
  auto f = fixtures::random_odd_family(circle(64), grid(), 3, rng);
  auto chk = index_theorem_check(f, 90, cfg);
  MESSAGE("index check: lhs " << chk.lhs << " rhs " << chk.rhs << " tau "
                              << chk.tau_winding << " basic "
                              << chk.basicness);
  CHECK(std::abs(chk.lhs - std::lround(chk.lhs)) < 1e-5);
  CHECK(std::lround(chk.lhs) == std::lround(chk.rhs));
  CHECK(std::abs(chk.lhs - chk.tau_winding) < 1e-4);
  CHECK(chk.basicness < 1e-6);
}
