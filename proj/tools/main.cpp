#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "adsmax/errors.hpp"

using namespace adsmax;

int main(int argc, char** argv) {
  CLI::App app{"Maximal surfaces in AdS3, convex-hull width and minimal Lagrangian maps"};
  app.require_subcommand(1);

  std::string config_path;
  cli::Overrides o;
  std::array<int, 2> mesh_res{};
  bool quiet = false;
#ifdef ADSMAX_FAULT_INJECTION
  std::string fault;
#endif

  const std::vector<std::pair<std::string, std::string>> commands{
      {"width", "hull width, quasi-symmetry modulus and regularity margin of the boundary"},
      {"qs-check", "cross-ratio checks and sampled quasi-symmetry modulus"},
      {"solve", "maximal surface by Newton with exhaustion, exported and audited"},
      {"flow", "mean curvature flow to the maximal surface, exported and audited"},
      {"extract-map", "left and right projections and the minimal Lagrangian map"},
      {"verify", "invariant suite on built-in fixtures"},
      {"export", "boundary curve, hull and sheets as CSV"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON config")->check(CLI::ExistingFile);
    sub->add_option_function<std::string>("--out", [&](const std::string& s) { o.out = s; }, "output directory");
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { o.seed = s; }, "random seed");
    sub->add_option_function<double>("--mesh-r", [&](double r) { o.mesh_r = r; }, "mesh radius (Poincare)");
    sub->add_option("--mesh-res", mesh_res, "rings and angular divisions");
    sub->add_option_function<double>("--tol", [&](double t) { o.tol = t; }, "mean curvature tolerance");
    sub->add_flag("-q,--quiet", quiet, "do not print the report");
#ifdef ADSMAX_FAULT_INJECTION
    sub->add_option("--inject-fault", fault, "test builds only: perturb a formula")->check(CLI::IsMember({"geodesic"}));
#endif
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::exit_validation;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  if (app.get_subcommands().front()->count("--mesh-res")) o.mesh_res = mesh_res;

  cli::RunConfig cfg;
  try {
    cfg = cli::load_config(config_path, o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_validation;
  }

  cli::VerifyOptions opt;
#ifdef ADSMAX_FAULT_INJECTION
  if (fault == "geodesic")
    opt.geodesic = [](const lorentz::QuadricPoint& p, const lorentz::TangentVec& v, double s) {
      return lorentz::geodesic_exp(p, v, s * (1 + 1e-3));
    };
#endif

  const cli::Report R = cli::run_command(name, cfg, opt);
  if (!quiet) std::cout << R.to_json().dump(2) << '\n';
  if (!R.error.empty()) std::cerr << "error: " << R.error << '\n';
  for (const cli::Audit& a : R.audits)
    if (!a.pass) std::cerr << (a.required ? "FAIL " : "advisory ") << a.name << ": " << a.value << ' ' << a.relation << ' ' << a.threshold << '\n';
  return R.exit_code;
}
