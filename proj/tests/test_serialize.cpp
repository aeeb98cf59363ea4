#include "doctest.h"
#include "etalab/fixtures.hpp"
#include "etalab/serialize.hpp"
#include "json.hpp"

using namespace etalab;
using namespace etalab::serialize;

TEST_CASE("form field round trip") {
  Rng rng(400, "serialize-form");
  chern::ParamDomain dom{{chern::Axis{6}, chern::Axis{5}}};
  chern::FormField f = chern::FormField::zero(2, dom);
  for (auto& comp : f.comps)
    for (auto& v : comp) v = rng.complex_gaussian();
  auto rec = form_field_from_json(to_json(f));
  CHECK(rec.degree == f.degree);
  CHECK(rec.tuples == f.tuples);
  CHECK((rec - f).norm_inf() == 0.0);
}

TEST_CASE("epsilon element round trip") {
  Rng rng(401, "serialize-eps");
  auto g = adiabatic::BiGrid::make(24, 24);
  auto e = fixtures::random_extended_eps(g, 2, rng);
  auto rec = epsilon_from_json(to_json(e));
  CHECK(rec.N == e.N);
  CHECK(rec.unital == e.unital);
  CHECK(rec.cls == e.cls);
  double m = 0;
  for (size_t p = 0; p < e.a0.size(); ++p) {
    m = std::max(m, (rec.a0[p] - e.a0[p]).cwiseAbs().maxCoeff());
    m = std::max(m, (rec.a1[p] - e.a1[p]).cwiseAbs().maxCoeff());
  }
  for (size_t j = 0; j < e.right0.size(); ++j)
    m = std::max(m, (rec.right0[j] - e.right0[j]).cwiseAbs().maxCoeff());
  CHECK(m == 0.0);
}

TEST_CASE("odd family round trip") {
  Rng rng(402, "serialize-odd");
  auto grid = suspend::TauGrid::make();
  chern::ParamDomain base{{chern::Axis{8}}};
  auto f = fixtures::random_odd_family(base, grid, 3, rng);
  auto rec = odd_family_from_json(to_json(f), grid);
  CHECK(rec.dim() == 3);
  double m = 0;
  for (int p = 0; p < base.size(); ++p)
    m = std::max(m, (rec.A[p] - f.A[p]).cwiseAbs().maxCoeff());
  CHECK(m == 0.0);
}

TEST_CASE("report schema") {
  Report r;
  r.suite = "demo";
  r.config["seed"] = "7";
  CaseResult c;
  c.name = "case";
  c.check = "identity";
  c.lhs = Complex(1.0, 2.0);
  c.rhs = Complex(1.0, 2.0);
  c.pass = true;
  r.cases.push_back(c);
  r.passed = true;
  auto j = nlohmann::json::parse(to_json(r));
  CHECK(j.at("schema") == "etalab/1");
  CHECK(j.at("suite") == "demo");
  CHECK(j.at("passed") == true);
  CHECK(j.at("cases").size() == 1);
  CHECK(j.at("cases")[0].at("lhs")[1] == 2.0);
}

TEST_CASE("eta value serializes with forms") {
  eta::EtaValue v;
  v.dom = chern::ParamDomain{{chern::Axis{4}, chern::Axis{4}}};
  v.eta0.assign(v.dom.size(), Complex(0.5, 0.0));
  v.forms.push_back(chern::FormField::zero(2, v.dom));
  auto j = nlohmann::json::parse(to_json(v));
  CHECK(j.at("eta0").size() == 2 * v.dom.size());
  CHECK(j.at("forms").size() == 1);
}

TEST_CASE("file round trip") {
  const std::string path = "serialize_test_scratch.json";
  write_file(path, "{\"x\": 1}");
  CHECK(read_file(path) == "{\"x\": 1}");
  std::remove(path.c_str());
}
