#include <cmath>

#include "doctest.h"
#include "etalab/fixtures.hpp"
#include "etalab/suspend.hpp"

using namespace etalab;
using namespace etalab::suspend;

namespace {
GridPtr grid() {
  static GridPtr g = TauGrid::make();
  return g;
}
std::vector<Complex> sample_scalar(const GridPtr& g, double (*f)(double)) {
  std::vector<Complex> out(g->n());
  for (int j = 0; j < g->n(); ++j) out[j] = f(g->node(j));
  return out;
}
}  // namespace

TEST_CASE("quadrature of a gaussian") {
  auto f = sample_scalar(grid(), [](double t) { return std::exp(-t * t); });
  CHECK(std::abs(grid()->quadrature(f) - std::sqrt(kPi)) < 1e-10);
}

TEST_CASE("quadrature of a lorentzian needs the endpoint correction") {
  auto f = sample_scalar(grid(), [](double t) { return 1.0 / (1.0 + t * t); });
  CHECK(std::abs(grid()->quadrature(f) - kPi) < 1e-8);
}

TEST_CASE("quadrature of an odd integrand vanishes") {
  auto f =
      sample_scalar(grid(), [](double t) { return t * std::exp(-t * t); });
  CHECK(std::abs(grid()->quadrature(f)) < 1e-12);
}

TEST_CASE("quadrature rejects non-decaying samples") {
  auto f = sample_scalar(grid(), [](double t) { return 1.0 + 0.0 * t; });
  CHECK_THROWS_AS(grid()->quadrature(f), EtalabError);
}

TEST_CASE("spectral tau derivative of a gaussian") {
  std::vector<Matrix> f(grid()->n());
  for (int j = 0; j < grid()->n(); ++j) {
    const double t = grid()->node(j);
    f[j] = std::exp(-t * t) * Matrix::Identity(2, 2);
  }
  auto d = grid()->tau_derivative(f);
  double err = 0;
  for (int j = 0; j < grid()->n(); ++j) {
    const double t = grid()->node(j);
    err = std::max(err, (d[j] + 2 * t * std::exp(-t * t) *
                                     Matrix::Identity(2, 2))
                            .cwiseAbs()
                            .maxCoeff());
  }
  CHECK(err < 1e-7);
}

TEST_CASE("cumulative integral matches erf") {
  std::vector<Matrix> f(grid()->n());
  for (int j = 0; j < grid()->n(); ++j)
    f[j] = std::exp(-grid()->node(j) * grid()->node(j)) * Matrix::Identity(1, 1);
  auto [vals, total] = grid()->cumulative(f);
  CHECK(std::abs(total(0, 0) - std::sqrt(kPi)) < 1e-8);
  double err = 0;
  for (int j = 0; j < grid()->n(); ++j) {
    const double t = grid()->node(j);
    const double expect = 0.5 * std::sqrt(kPi) * (1.0 + std::erf(t));
    err = std::max(err, std::abs(vals[j](0, 0) - expect));
  }
  CHECK(err < 1e-7);
}

TEST_CASE("interpolation hits off-grid points") {
  std::vector<Complex> f(grid()->n());
  for (int j = 0; j < grid()->n(); ++j) {
    const double t = grid()->node(j);
    f[j] = std::exp(-0.7 * t * t);
  }
  for (double tau : {0.1234, -1.618, 2.71, 7.5}) {
    CHECK(std::abs(grid()->interpolate(f, tau) - std::exp(-0.7 * tau * tau)) <
          1e-8);
  }
}

TEST_CASE("pointwise compose and inverse of suspended loops") {
  Rng rng(5, "suspend-compose");
  auto a = fixtures::random_suspended(grid(), 3, rng);
  auto ai = pointwise_inverse(a);
  auto prod = pointwise_compose(a, ai);
  double err = 0;
  for (const auto& s : prod.samples)
    err = std::max(err, s.cwiseAbs().maxCoeff());
  CHECK(err < 1e-12);
}

TEST_CASE("make_path lands on the requested limit") {
  Rng rng(9, "suspend-path");
  const int N = 4;
  Matrix pert = rng.matrix(N, 0.3);
  opcore::GroupElement g(pert);
  auto path = make_path(g, grid());
  path.validate();
  auto back = restrict_infinity(path);
  CHECK((back.perturbation() - pert).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("reconstruct_from_derivative inverts the derivative") {
  Rng rng(11, "suspend-reconstruct");
  auto a = fixtures::random_half_open(grid(), 3, rng);
  auto rec = reconstruct_from_derivative(grid(), a.derivative);
  double err = 0;
  for (int j = 0; j < grid()->n(); ++j)
    err = std::max(err, (rec.samples[j] - a.samples[j]).cwiseAbs().maxCoeff());
  CHECK(err < 1e-7);
  CHECK((rec.limit_perturbation - a.limit_perturbation).cwiseAbs().maxCoeff() <
        1e-7);
}

TEST_CASE("contraction profile endpoints") {
  for (double x : {0.05, 0.3, 0.55, 0.81, 0.99}) {
    CHECK(contraction_profile(0.0, x) == doctest::Approx(0.0));
    CHECK(contraction_profile(1.0, x) == doctest::Approx(x));
  }
  // cutoff saturates at 1 past x = 0.8 and vanishes at the left end
  CHECK(contraction_cutoff(0.85) == doctest::Approx(1.0));
  CHECK(contraction_cutoff(0.95) == doctest::Approx(1.0));
  CHECK(contraction_cutoff(0.0) == doctest::Approx(0.0));
}

TEST_CASE("contraction homotopy interpolates between zero and the element") {
  Rng rng(13, "suspend-contraction");
  auto a = fixtures::random_half_open(grid(), 2, rng);
  auto at1 = contraction_homotopy(a, 1.0);
  double err = 0;
  for (int j = 0; j < grid()->n(); ++j)
    err = std::max(err, (at1.samples[j] - a.samples[j]).cwiseAbs().maxCoeff());
  CHECK(err < 1e-6);
  auto at0 = contraction_homotopy(a, 0.0);
  double norm0 = 0;
  for (const auto& s : at0.samples)
    norm0 = std::max(norm0, s.cwiseAbs().maxCoeff());
  CHECK(norm0 < 1e-8);
}

TEST_CASE("product suspended element evaluates polynomial plus schwartz") {
  Rng rng(15, "suspend-product");
  const int N = 2;
  ProductSuspendedElement a;
  a.poly_coeffs = {rng.hermitian(N), kI * Matrix::Identity(N, N)};
  a.schwartz_part = fixtures::random_suspended(grid(), N, rng);
  const double tau = 0.37;
  Matrix expect = a.poly_coeffs[0] + kI * tau * Matrix::Identity(N, N) +
                  a.schwartz_part.value_at(tau);
  CHECK((a.value_at(tau) - expect).cwiseAbs().maxCoeff() < 1e-12);
  // derivative against a central difference
  const double d = 1e-5;
  Matrix fd = (a.value_at(tau + d) - a.value_at(tau - d)) / (2 * d);
  CHECK((a.derivative_at(tau) - fd).cwiseAbs().maxCoeff() < 1e-7);
}
