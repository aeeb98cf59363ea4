#pragma once

#include <map>

#include "etalab/adiabatic.hpp"
#include "etalab/bundles.hpp"
#include "etalab/eta.hpp"

namespace etalab::serialize {

struct CaseResult {
  std::string name;
  std::string check;  // identity or oracle being exercised
  Complex lhs = 0, rhs = 0;
  double abs_err = 0, rel_err = 0, tol = 0;
  bool pass = false;
};

struct Report {
  std::string suite;
  std::map<std::string, std::string> config;
  std::vector<CaseResult> cases;
  bool passed = false;
  double wall_ms = 0;
};

std::string to_json(const Report& r);

std::string to_json(const chern::FormField& f);
chern::FormField form_field_from_json(const std::string& text);

std::string to_json(const eta::EtaValue& v);

std::string to_json(const adiabatic::EpsilonElement& e);
adiabatic::EpsilonElement epsilon_from_json(const std::string& text);

// {N, axes: [{n, length, periodic}], blocks: [hermitian matrices], seed}
bundles::OddFamily odd_family_from_json(const std::string& text,
                                        const suspend::GridPtr& grid);
std::string to_json(const bundles::OddFamily& f);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace etalab::serialize
