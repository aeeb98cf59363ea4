#include "doctest.h"
#include "etalab/opcore.hpp"

using namespace etalab;
using namespace etalab::opcore;

TEST_CASE("group composition matches matrix product") {
  Rng rng(42, "opcore-compose");
  const int N = 5;
  GroupElement g(rng.matrix(N, 0.3));
  GroupElement h(rng.matrix(N, 0.3));
  GroupElement gh = compose(g, h);
  Matrix expect = g.full() * h.full();
  CHECK((gh.full() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("inverse composes to identity") {
  Rng rng(42, "opcore-inverse");
  const int N = 6;
  GroupElement g(rng.matrix(N, 0.3));
  GroupElement gi = group_inverse(g);
  Matrix prod = compose(g, gi).full();
  CHECK((prod - Matrix::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fredholm determinant is multiplicative") {
  Rng rng(7, "opcore-det");
  const int N = 4;
  GroupElement g(rng.matrix(N, 0.3));
  GroupElement h(rng.matrix(N, 0.3));
  Complex lhs = fredholm_det(compose(g, h));
  Complex rhs = fredholm_det(g) * fredholm_det(h);
  CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(rhs));
}

TEST_CASE("identity has unit determinant and full margin") {
  GroupElement id = GroupElement::identity(3);
  CHECK(std::abs(fredholm_det(id) - 1.0) < 1e-15);
  CHECK(id.inv_margin() == doctest::Approx(1.0));
}

TEST_CASE("singular perturbation is rejected") {
  const int N = 3;
  Matrix a = -Matrix::Identity(N, N);
  CHECK_THROWS_AS(GroupElement{a}, EtalabError);
}

TEST_CASE("hermitian spectrum of a diagonal matrix") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 0) = 2.0;
  a(1, 1) = -1.0;
  a(2, 2) = 0.5;
  auto ev = hermitian_spectrum(a);
  CHECK(ev[0] == doctest::Approx(-1.0));
  CHECK(ev[1] == doctest::Approx(0.5));
  CHECK(ev[2] == doctest::Approx(2.0));
}

TEST_CASE("non-hermitian input rejected by spectrum") {
  Rng rng(3, "opcore-nonherm");
  CHECK_THROWS_AS(hermitian_spectrum(rng.matrix(4, 1.0)), EtalabError);
}
