#pragma once

#include <functional>
#include <string>
#include <vector>

#include "config.hpp"
#include "adsmax/lorentz.hpp"

namespace adsmax::cli {

enum ExitCode { exit_pass = 0, exit_validation = 2, exit_convergence = 3, exit_audit = 4 };

struct Audit {
  std::string name;
  double value = 0;
  double threshold = 0;
  std::string relation;  // "<", "<=", ">", ">=", "=="
  bool pass = false;
  bool required = true;  // advisory audits are reported but do not set the exit code
};

// checks value against threshold and records it
Audit audit(std::string name, double value, std::string relation, double threshold, bool required = true);
Audit audit_bool(std::string name, bool ok, bool required = true);

struct Report {
  std::string command;
  json config;       // effective config
  json diagnostics = json::object();
  std::vector<Audit> audits;
  json outputs = json::array();  // {file, bytes, fnv1a}
  json timings = json::object();
  int exit_code = exit_pass;
  std::string error;

  bool audits_pass() const;
  // everything except timings and the runtime block
  json stable_json() const;
  json to_json() const;
};

// each command fills a report; library exceptions propagate
Report cmd_width(const RunConfig& c);
Report cmd_qs_check(const RunConfig& c);
Report cmd_solve(const RunConfig& c);
Report cmd_flow(const RunConfig& c);
Report cmd_extract(const RunConfig& c);
Report cmd_export(const RunConfig& c);

struct VerifyOptions {
  lorentz::GeodesicFn geodesic = lorentz::geodesic_exp;
};
Report cmd_verify(const RunConfig& c, const VerifyOptions& opt = {});

// runs a command by name, maps exceptions to exit codes and writes
// <out>/report.json; output files are written relative to c.out
Report run_command(const std::string& name, const RunConfig& c, const VerifyOptions& opt = {});

}  // namespace adsmax::cli
