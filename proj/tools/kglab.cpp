// kglab: runs the symbolic, ODE and PDE studies and writes CSV/JSON reports.
// Exit status 0 iff every check passes; 2 on a configuration or module error.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>

#include "CLI11.hpp"

#include "kgscat/asym_engine.hpp"
#include "kgscat/error.hpp"
#include "kgscat/experiments.hpp"
#include "kgscat/profile_ode.hpp"
#include "kgscat/slope_fit.hpp"
#include "kgscat/transforms.hpp"

using namespace kgscat;

namespace {

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open config " + path);
  try {
    return json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw Error(Errc::ConfigInvalid, std::string("config parse error: ") + e.what());
  }
}

template <typename T>
void overlay(json& cfg, const char* key, const std::optional<T>& value) {
  if (value) cfg[key] = *value;
}

ExperimentReport selftest() {
  ExperimentReport r;
  r.kind = "selftest";
  r.config = json::object();
  const OscAlgebra alg;

  const Expansion psi_g1 = freeze_generators(apply_Psi(profile_g1(), alg));
  r.checks.push_back(CheckRecord::at_least("selftest.psi_g1_min_order", psi_g1.min_order(), 2));

  const MembershipVerdict v0 = classify(apply_Psi(ladder_seed(8), alg));
  r.checks.push_back(CheckRecord::within("selftest.psi_v0_class", v0.in_Sk_for, 1, 0));
  r.checks.push_back(CheckRecord::at_most("selftest.psi_v0_resonant", v0.resonant_at_lowest ? 1 : 0, 0));

  const HyperbolicPoint h = to_hyperbolic(5, 3);
  r.checks.push_back(CheckRecord::at_most("selftest.to_hyperbolic",
                                          std::abs(h.rho - 4) + std::abs(h.y - std::log(2.0)), 1e-14));

  std::vector<std::pair<double, double>> pts;
  for (double x : log_spaced(1, 100, 10)) pts.emplace_back(x, 3 / x);
  r.checks.push_back(CheckRecord::within("selftest.fit_inverse", fit_slope(pts).slope, -1, 1e-12));

  const OdeParams zero = OdeParams::make(0.0, 0.0, 0.1, 10, 100);
  const OdeSolution sol = solve_backward(zero, OdeSeed::Ladder, 200, uniform_grid(10, 100, 0.5));
  r.checks.push_back(CheckRecord::at_most("selftest.ode_zero_data", sol.g.cwiseAbs().maxCoeff(), 0.0));
  return r;
}

int finish(const ExperimentReport& report, const std::string& out, const std::string& format) {
  write_report(report, out, format);
  for (const auto& c : report.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " measured=" << c.measured;
    if (c.kind == CheckKind::Within) std::cout << " target=" << c.target;
    std::cout << " tolerance=" << c.tolerance << '\n';
  }
  std::cout << (report.passed() ? "all checks passed" : "some checks failed") << " (" << report.checks.size()
            << " checks, report in " << out << ")\n";
  return report.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kglab: modified-scattering experiments for the cubic Klein-Gordon equation"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out = "kglab_out";
  std::string format = "csv";
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--out", out, "output directory");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"csv", "json"}));

  std::optional<std::string> beta;
  std::optional<std::string> profile;

  auto* expand = app.add_subcommand("expand", "build the asymptotic ladder symbolically");
  std::optional<int> K;
  std::optional<std::string> mode;
  expand->add_option("--K", K, "ladder order");
  expand->add_option("--mode", mode, "constant or general generators");

  auto* ode = app.add_subcommand("ode", "profile ODE decay study");
  std::optional<double> a, b, rho_min, rho_max, rho_terminal;
  std::optional<int> seed_order;
  std::optional<std::string> method;
  ode->add_option("--a", a, "amplitude");
  ode->add_option("--b", b, "phase");
  ode->add_option("--beta", beta, "nonlinearity (number or p/q)");
  ode->add_option("--rho-min", rho_min);
  ode->add_option("--rho-max", rho_max);
  ode->add_option("--rho-terminal", rho_terminal);
  ode->add_option("--seed-order", seed_order, "ladder order of the terminal data");
  ode->add_option("--method", method, "backward or picard")->check(CLI::IsMember({"backward", "picard"}));

  auto* pde = app.add_subcommand("pde", "hyperbolic march (or Cartesian run with --t-seed)");
  std::optional<int> order, grid;
  std::optional<double> rho_start, rho_end, t_seed, t_end;
  pde->add_option("--order", order, "largest ladder order k compared against");
  pde->add_option("--rho-start", rho_start);
  pde->add_option("--rho-end", rho_end);
  pde->add_option("--t-seed", t_seed, "Cartesian seed time (selects the Cartesian run)");
  pde->add_option("--t-end", t_end);
  pde->add_option("--grid", grid, "ny (hyperbolic) or nx (Cartesian)");
  pde->add_option("--beta", beta);
  pde->add_option("--profile", profile, "e.g. gaussian:0.5:1");

  auto* energy = app.add_subcommand("energy", "Cartesian energy and convergence-ratio study");
  std::optional<int> nx;
  energy->add_option("--t-seed", t_seed);
  energy->add_option("--t-end", t_end);
  energy->add_option("--grid", nx, "nx");
  energy->add_option("--beta", beta);
  energy->add_option("--profile", profile);

  auto* pipeline = app.add_subcommand("pipeline", "every study with acceptance-scale defaults");
  auto* self = app.add_subcommand("selftest", "fast symbolic and trivial-case checks");

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg = load_config(config_path);
    if (*self) return finish(selftest(), out, format);
    if (*pipeline) {
      if (cfg.is_object() && !cfg.contains("kind")) cfg["kind"] = "pipeline";
      return finish(run(cfg), out, format);
    }
    if (!cfg.is_object()) throw Error(Errc::ConfigInvalid, "subcommand configs must be objects");
    if (*expand) {
      cfg["kind"] = "expand";
      overlay(cfg, "K", K);
      overlay(cfg, "mode", mode);
    } else if (*ode) {
      cfg["kind"] = "ode";
      overlay(cfg, "a", a);
      overlay(cfg, "b", b);
      overlay(cfg, "beta", beta);
      overlay(cfg, "rho_min", rho_min);
      overlay(cfg, "rho_max", rho_max);
      overlay(cfg, "rho_terminal", rho_terminal);
      overlay(cfg, "seed_order", seed_order);
      overlay(cfg, "method", method);
    } else if (*pde && !t_seed) {
      cfg["kind"] = "pde";
      overlay(cfg, "order", order);
      overlay(cfg, "rho_start", rho_start);
      overlay(cfg, "rho_end", rho_end);
      overlay(cfg, "ny", grid);
      overlay(cfg, "beta", beta);
      overlay(cfg, "profile", profile);
      if (!cfg.contains("checkpoint_file")) cfg["checkpoint_file"] = out + "/pde_final.ckpt";
      std::filesystem::create_directories(out);
    } else {
      cfg["kind"] = "energy";
      if (*pde) {
        overlay(cfg, "seed_order", order);
        nx = grid;
      }
      overlay(cfg, "t_seed", t_seed);
      overlay(cfg, "t_end", t_end);
      overlay(cfg, "beta", beta);
      overlay(cfg, "profile", profile);
      if (nx) {
        const double ts = cfg.value("t_seed", 400.0);
        const double margin = cfg.value("domain_margin", 10.0);
        if (*nx < 9) throw Error(Errc::ConfigInvalid, "--grid must be at least 9");
        cfg["dx"] = 2 * (ts + margin) / (*nx - 1);
      }
    }
    return finish(run(cfg), out, format);
  } catch (const Error& e) {
    std::cerr << "kglab: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "kglab: " << e.what() << '\n';
    return 2;
  }
}
