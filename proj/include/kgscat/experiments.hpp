#pragma once

// Experiment orchestration: each study runs one pipeline, records named
// checks (measured value against a tolerance) and emits tables for CSV/JSON
// reports.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "kgscat/asym_engine.hpp"
#include "kgscat/generator_profile.hpp"

namespace kgscat {

using json = nlohmann::ordered_json;

enum class CheckKind { AtMost, AtLeast, Within };

/// One verdict, derived only from measured, target and tolerance:
/// AtMost: measured <= tolerance; AtLeast: measured >= tolerance;
/// Within: |measured - target| <= tolerance.
struct CheckRecord {
  std::string name;
  CheckKind kind = CheckKind::AtMost;
  double measured = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;

  static CheckRecord at_most(std::string name, double measured, double tolerance, std::string detail = {});
  static CheckRecord at_least(std::string name, double measured, double tolerance, std::string detail = {});
  static CheckRecord within(std::string name, double measured, double target, double tolerance,
                            std::string detail = {});
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string to_csv() const;
};

struct ExperimentReport {
  std::string kind;
  json config;
  std::vector<CheckRecord> checks;
  std::map<std::string, Table> tables;
  std::map<std::string, std::string> texts;
  json provenance = json::object();

  bool passed() const;
  const CheckRecord& check(const std::string& name) const;
  void append(const ExperimentReport& other, const std::string& prefix);
  json to_json() const;
  std::string checks_csv() const;
};

enum class ExperimentKind { Expand, OdeStudy, PdeStudy, EnergyStudy, CrossCheck, Mms, FullPipeline };

ExperimentKind parse_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

/// Profile spec: "gaussian:A[:W[:C]]", "sech:A[:W[:C]]", "constant:A[:B]" or
/// a JSON object {"a": {...shape...}, "b": {...}, "b0": x}.
GeneratorProfile parse_profile(const json& spec);
json profile_to_json(const GeneratorProfile& p);

/// beta as a number or a rational string such as "1/10".
double parse_beta(const json& value);

/// Cached ladders (built once per process, thread-safe).
const ExpansionLadder& cached_ladder(int K, GeneratorMode mode);

/// g_1 from a constant-generator V_1: its terms at order 0 and the
/// nonresonant terms (n != 1) above.
Expansion nonresonant_part(const Expansion& v);

// Every study takes its section of the config with defaults filled in for
// missing keys; unknown keys raise ConfigInvalid.

/// Symbolic ladder: classifications, V_K and residual serializations, g_1.
ExperimentReport run_expand(const json& cfg);
/// Profile ODE: decay slopes, backward vs Picard, terminal doubling.
ExperimentReport run_ode_study(const json& cfg);
/// Hyperbolic march: decay slopes of |V - V_m|, boundary monitor.
ExperimentReport run_pde_study(const json& cfg);
/// Cartesian run: energy drift, its refinement order, the convergence ratio
/// of v - v_0, forward light-cone confinement.
ExperimentReport run_energy_study(const json& cfg);
/// Hyperbolic and Cartesian solutions of one seed compared at a time slice.
ExperimentReport run_cross_check(const json& cfg);
/// Manufactured solutions for both solvers under two refinements.
ExperimentReport run_mms(const json& cfg);

/// Dispatches on cfg["kind"]; FullPipeline runs every study (concurrently)
/// with the sections found in cfg. A JSON array runs each element
/// concurrently and merges the reports.
ExperimentReport run(const json& cfg);

/// Writes report.json (format json) or checks.csv plus one CSV per table
/// (format csv), and the text artifacts, into dir. IoError on failure.
void write_report(const ExperimentReport& report, const std::string& dir, const std::string& format);

}  // namespace kgscat
