#include "etalab/serialize.hpp"

#include <fstream>
#include "json.hpp"
#include <sstream>

namespace etalab::serialize {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json data = json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      data.push_back(m(i, j).real());
      data.push_back(m(i, j).imag());
    }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix matrix_from_json(const json& j) {
  const int r = j.at("rows"), c = j.at("cols");
  const auto& d = j.at("data");
  require((int)d.size() == 2 * r * c, "matrix: data length mismatch");
  Matrix m(r, c);
  int k = 0;
  for (int i = 0; i < r; ++i)
    for (int jj = 0; jj < c; ++jj) {
      m(i, jj) = Complex(d[k], d[k + 1]);
      k += 2;
    }
  return m;
}

json field_to_json(const std::vector<Matrix>& f) {
  json out = json::array();
  for (const auto& m : f) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<Matrix> field_from_json(const json& j) {
  std::vector<Matrix> out;
  for (const auto& e : j) out.push_back(matrix_from_json(e));
  return out;
}

json domain_to_json(const chern::ParamDomain& d) {
  json axes = json::array();
  for (const auto& a : d.axes)
    axes.push_back(
        {{"n", a.n}, {"length", a.length}, {"periodic", a.periodic}});
  return axes;
}

chern::ParamDomain domain_from_json(const json& j) {
  chern::ParamDomain d;
  for (const auto& a : j)
    d.axes.push_back({a.at("n"), a.at("length"), a.at("periodic")});
  return d;
}

json complex_field_to_json(const std::vector<Complex>& f) {
  json out = json::array();
  for (const auto& v : f) {
    out.push_back(v.real());
    out.push_back(v.imag());
  }
  return out;
}

}  // namespace

std::string to_json(const Report& r) {
  json cases = json::array();
  for (const auto& c : r.cases)
    cases.push_back({{"name", c.name},
                     {"check", c.check},
                     {"lhs", {c.lhs.real(), c.lhs.imag()}},
                     {"rhs", {c.rhs.real(), c.rhs.imag()}},
                     {"abs_err", c.abs_err},
                     {"rel_err", c.rel_err},
                     {"tol", c.tol},
                     {"pass", c.pass}});
  json out{{"schema", "etalab/1"},
           {"suite", r.suite},
           {"config", r.config},
           {"cases", cases},
           {"passed", r.passed},
           {"wall_ms", r.wall_ms}};
  return out.dump(2);
}

std::string to_json(const chern::FormField& f) {
  json comps = json::array();
  for (size_t t = 0; t < f.tuples.size(); ++t)
    comps.push_back(
        {{"tuple", f.tuples[t]}, {"data", complex_field_to_json(f.comps[t])}});
  json out{{"degree", f.degree},
           {"axes", domain_to_json(f.dom)},
           {"comps", comps}};
  return out.dump(2);
}

chern::FormField form_field_from_json(const std::string& text) {
  json j = json::parse(text);
  chern::FormField f = chern::FormField::zero(j.at("degree"),
                                              domain_from_json(j.at("axes")));
  for (const auto& c : j.at("comps")) {
    const int ti = f.tuple_index(c.at("tuple").get<std::vector<int>>());
    const auto& d = c.at("data");
    require((int)d.size() == 2 * f.dom.size(), "form field: data length");
    for (int p = 0; p < f.dom.size(); ++p)
      f.comps[ti][p] = Complex(d[2 * p], d[2 * p + 1]);
  }
  return f;
}

std::string to_json(const eta::EtaValue& v) {
  json forms = json::array();
  for (const auto& f : v.forms) forms.push_back(json::parse(to_json(f)));
  json out{{"axes", domain_to_json(v.dom)},
           {"eta0", complex_field_to_json(v.eta0)},
           {"forms", forms}};
  return out.dump(2);
}

namespace {
const char* cls_name(adiabatic::EpsClass c) {
  switch (c) {
    case adiabatic::EpsClass::Schwartz: return "schwartz";
    case adiabatic::EpsClass::HalfOpenT: return "half_open_t";
    default: return "d_class";
  }
}
adiabatic::EpsClass cls_from(const std::string& s) {
  if (s == "schwartz") return adiabatic::EpsClass::Schwartz;
  if (s == "half_open_t") return adiabatic::EpsClass::HalfOpenT;
  if (s == "d_class") return adiabatic::EpsClass::DClass;
  throw EtalabError("unknown epsilon class: " + s);
}
}  // namespace

std::string to_json(const adiabatic::EpsilonElement& e) {
  json out{{"class", cls_name(e.cls)},
           {"j", e.j},
           {"dims", e.N},
           {"unital", e.unital},
           {"grids",
            {{"nt", e.grid.t->n()},
             {"ntau", e.grid.tau->n()},
             {"L", e.grid.t->scale()}}},
           {"a0", field_to_json(e.a0)},
           {"a1", field_to_json(e.a1)},
           {"boundary_slice", field_to_json(e.right0)},
           {"left_slice", field_to_json(e.left0)}};
  return out.dump(2);
}

adiabatic::EpsilonElement epsilon_from_json(const std::string& text) {
  json j = json::parse(text);
  adiabatic::EpsilonElement e;
  const auto& g = j.at("grids");
  e.grid = adiabatic::BiGrid::make(g.at("nt"), g.at("ntau"), g.at("L"));
  e.N = j.at("dims");
  e.unital = j.at("unital");
  e.cls = cls_from(j.at("class"));
  e.j = j.at("j");
  e.a0 = field_from_json(j.at("a0"));
  e.a1 = field_from_json(j.at("a1"));
  e.right0 = field_from_json(j.at("boundary_slice"));
  e.left0 = field_from_json(j.at("left_slice"));
  e.validate();
  return e;
}

bundles::OddFamily odd_family_from_json(const std::string& text,
                                        const suspend::GridPtr& grid) {
  json j = json::parse(text);
  bundles::OddFamily f;
  f.base = domain_from_json(j.at("axes"));
  f.grid = grid;
  f.A = field_from_json(j.at("blocks"));
  require((int)j.at("N") == f.dim(), "odd family: dim mismatch");
  f.validate();
  return f;
}

std::string to_json(const bundles::OddFamily& f) {
  json out{{"N", f.dim()},
           {"axes", domain_to_json(f.base)},
           {"blocks", field_to_json(f.A)}};
  return out.dump(2);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  require(out.good(), "cannot write " + path);
  out << text;
}

}  // namespace etalab::serialize
