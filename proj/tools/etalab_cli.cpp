#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "etalab/suites.hpp"
#include "json.hpp"

using etalab::suites::RunConfig;

namespace {

void load_config(const std::string& path, RunConfig& cfg) {
  auto j = nlohmann::json::parse(etalab::serialize::read_file(path));
  if (j.contains("N")) cfg.N = j["N"];
  if (j.contains("n_nodes")) cfg.n_nodes = j["n_nodes"];
  if (j.contains("L")) cfg.L = j["L"];
  if (j.contains("tail_tol")) cfg.tail_tol = j["tail_tol"];
  if (j.contains("margin_floor")) cfg.margin_floor = j["margin_floor"];
  if (j.contains("grid_scale")) cfg.grid_scale = j["grid_scale"];
  if (j.contains("seed")) cfg.seed = j["seed"];
  if (j.contains("bracket"))
    cfg.bracket = j["bracket"] == "verbatim"
                      ? etalab::adiabatic::BracketMode::Verbatim
                      : etalab::adiabatic::BracketMode::Td9;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"etalab: verification suites for the suspended-calculus library"};

  std::string suite, quantity, fixture, config_path, out_path;
  std::string bracket;
  RunConfig cfg;

  app.add_option("--suite", suite,
                 "run a named suite: chern | eta | adiabatic | bundles | all");
  app.add_option("--compute", quantity,
                 "compute a quantity from a fixture: eta0 | winding | det_ad | "
                 "index (requires --fixture)");
  app.add_option("--fixture", fixture, "fixture file for --compute");
  app.add_option("--config", config_path, "JSON file with run parameters");
  app.add_option("--out", out_path, "write the JSON report to this path");
  auto* o_seed = app.add_option("--seed", cfg.seed, "random seed");
  auto* o_scale =
      app.add_option("--grid-scale", cfg.grid_scale,
                     "multiplier for the base-domain resolutions");
  auto* o_nodes = app.add_option("--nodes", cfg.n_nodes, "tau-grid nodes");
  auto* o_dim = app.add_option("--dim", cfg.N, "matrix dimension");
  auto* o_bracket = app.add_option("--bracket", bracket,
                                   "first-order bracket: td9 | verbatim");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      RunConfig from_file;
      load_config(config_path, from_file);
      // command-line values override the file
      std::swap(cfg, from_file);
      if (o_seed->count()) cfg.seed = from_file.seed;
      if (o_scale->count()) cfg.grid_scale = from_file.grid_scale;
      if (o_nodes->count()) cfg.n_nodes = from_file.n_nodes;
      if (o_dim->count()) cfg.N = from_file.N;
    }
    if (o_bracket->count()) {
      if (bracket != "td9" && bracket != "verbatim")
        throw etalab::EtalabError("unknown bracket: " + bracket);
      cfg.bracket = bracket == "verbatim"
                        ? etalab::adiabatic::BracketMode::Verbatim
                        : etalab::adiabatic::BracketMode::Td9;
    }

    if (suite.empty() == quantity.empty())
      throw etalab::EtalabError("pass exactly one of --suite or --compute");
    if (!quantity.empty() && fixture.empty())
      throw etalab::EtalabError("--compute requires --fixture");

    etalab::serialize::Report r =
        suite.empty() ? etalab::suites::compute(quantity, fixture, cfg)
                      : etalab::suites::run_suite(suite, cfg);

    for (const auto& c : r.cases)
      std::printf("[%s] %s: %s (err %.3g, tol %.3g)\n",
                  c.pass ? "pass" : "FAIL", c.name.c_str(), c.check.c_str(),
                  c.abs_err, c.tol);
    std::printf("%s: %s in %.0f ms\n", r.suite.c_str(),
                r.passed ? "all checks passed" : "FAILURES", r.wall_ms);

    const std::string j = etalab::serialize::to_json(r);
    if (out_path.empty())
      std::cout << j << "\n";
    else
      etalab::serialize::write_file(out_path, j);
    return r.passed ? 0 : 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
}
