#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "kgscat/error.hpp"
#include "kgscat/experiments.hpp"
#include "kgscat/slope_fit.hpp"

using namespace kgscat;

namespace {

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::IoError;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("slope fits recover power laws and refuse degenerate data") {
  std::vector<std::pair<double, double>> pts;
  for (double x : log_spaced(10, 1e4, 12)) pts.emplace_back(x, 5.0 * std::pow(x, -2.5));
  const SlopeFit f = fit_slope(pts);
  CHECK(f.slope == doctest::Approx(-2.5).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(f.stderr_slope < 1e-10);
  CHECK(f.points == 12);
  CHECK(fit_slope(pts, {100, 1e4}).points < 12);
  std::vector<std::pair<double, double>> cubic;
  for (double x : log_spaced(1, 50, 6)) cubic.emplace_back(x, 2.0 / (x * x * x));
  CHECK(fit_slope(cubic).slope == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(code_of([&] { (void)fit_slope(pts, {20, 30}); }) == Errc::DegenerateFit);
  pts[3].second = 0.0;
  CHECK(code_of([&] { (void)fit_slope(pts); }) == Errc::DegenerateFit);
  std::vector<std::pair<double, double>> same(5, {2.0, 1.0});
  CHECK(code_of([&] { (void)fit_slope(same); }) == Errc::DegenerateFit);
}

TEST_CASE("log spacing and windowed envelopes") {
  const auto xs = log_spaced(1, 1000, 4);
  REQUIRE(xs.size() == 4);
  CHECK(xs[1] == doctest::Approx(10.0));
  CHECK(xs[3] == doctest::Approx(1000.0));
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(1001, 0, 100);
  const Eigen::VectorXd v = (x.array().sin() / (1 + x.array())).matrix();
  const auto env = sup_envelope(x, v, {10.0, 50.0}, 2 * M_PI);
  REQUIRE(env.size() == 2);
  CHECK(env[0].first == 10.0);
  CHECK(env[0].second == doctest::Approx(1.0 / 11.0).epsilon(0.1));
}

TEST_CASE("check records derive their verdict from the numbers") {
  CHECK(CheckRecord::at_most("x", 1.0, 1.0).pass);
  CHECK_FALSE(CheckRecord::at_most("x", 1.1, 1.0).pass);
  CHECK(CheckRecord::at_least("x", 3.5, 3.5).pass);
  CHECK_FALSE(CheckRecord::within("x", -0.85, -1.0, 0.1).pass);
  CHECK(CheckRecord::within("x", -0.95, -1.0, 0.1).pass);
}

TEST_CASE("profiles parse from strings and objects") {
  const GeneratorProfile g = parse_profile("gaussian:0.5:2");
  CHECK(g.a.family == ProfileFamily::Gaussian);
  CHECK(g.a.amplitude == 0.5);
  CHECK(g.a.width == 2.0);
  const GeneratorProfile c = parse_profile("constant:1:0.25");
  CHECK(c.a_value(0, 3.0) == 1.0);
  CHECK(c.b_value(0, 3.0) == 0.25);
  const json obj = {{"a", {{"family", "sech"}, {"amplitude", 0.3}}}, {"b0", 0.5}};
  const GeneratorProfile s = parse_profile(obj);
  CHECK(s.a.family == ProfileFamily::Sech);
  CHECK(s.b0 == 0.5);
  CHECK(parse_profile(profile_to_json(s)).a.amplitude == 0.3);
  CHECK(code_of([] { (void)parse_profile("triangle:1"); }) == Errc::ConfigInvalid);
  CHECK(code_of([] { (void)parse_profile("gaussian:x"); }) == Errc::ConfigInvalid);
  CHECK(code_of([] { (void)parse_profile(json{{"a", {{"shape", 1}}}}); }) == Errc::ConfigInvalid);
}

TEST_CASE("beta parses numbers, decimals and rationals") {
  CHECK(parse_beta(json(0.1)) == 0.1);
  CHECK(parse_beta(json("0.1")) == 0.1);
  CHECK(parse_beta(json("1/10")) == doctest::Approx(0.1));
  CHECK(parse_beta(json("3/-6")) == -0.5);
  CHECK(code_of([] { (void)parse_beta(json("ten")); }) == Errc::ConfigInvalid);
  CHECK(code_of([] { (void)parse_beta(json::array()); }) == Errc::ConfigInvalid);
}

TEST_CASE("experiment kinds and config validation") {
  CHECK(parse_kind("energy") == ExperimentKind::EnergyStudy);
  CHECK(to_string(ExperimentKind::CrossCheck) == "cross");
  CHECK(code_of([] { (void)parse_kind("nope"); }) == Errc::ConfigInvalid);
  CHECK(code_of([] { (void)run(json{{"kind", "expand"}, {"K", 1}, {"typo", 2}}); }) == Errc::ConfigInvalid);
  CHECK(code_of([] { (void)run(json{{"kind", "expand"}, {"K", 9}}); }) == Errc::ConfigInvalid);
  CHECK(code_of([] { (void)run(json{{"kind", "pipeline"}, {"extra", json::object()}}); }) ==
        Errc::ConfigInvalid);
  CHECK(code_of([] { (void)run(json{{"kind", "expand"}, {"K", "one"}}); }) == Errc::ConfigInvalid);
}

TEST_CASE("expand reports certify the ladder and emit g1") {
  const ExperimentReport r = run(json{{"kind", "expand"}, {"K", 2}});
  CHECK(r.passed());
  CHECK(r.check("expand.residual_order_k2").measured == 3);
  CHECK(r.texts.at("g1.txt") == slurp(std::string(KGSCAT_GOLDEN_DIR) + "/g1.txt"));
  CHECK(r.config.at("mode") == "constant");
  CHECK_FALSE(r.provenance.contains("runtime_seconds"));
  const ExperimentReport timed = run(json{{"kind", "expand"}, {"K", 0}, {"record_runtime", true}});
  CHECK(timed.provenance.contains("runtime_seconds"));
}

TEST_CASE("batches run concurrently and keep every check") {
  const json batch = json::array({json{{"kind", "expand"}, {"K", 1}}, json{{"kind", "expand"}, {"K", 0}}});
  const ExperimentReport r = run(batch);
  CHECK(r.kind == "batch");
  CHECK(r.checks.size() == 5 + 2);
  CHECK(r.config.contains("experiment_1"));
}

TEST_CASE("zero-data ODE study passes trivially") {
  const json cfg = {{"kind", "ode"},           {"a", 0.0},          {"rho_min", 10.0},
                    {"rho_max", 200.0},        {"rho_terminal", 400.0}, {"fit_lo", 20.0},
                    {"fit_hi", 200.0},         {"picard_hi", 200.0}, {"picard_iterations", 3}};
  const ExperimentReport r = run(cfg);
  CHECK(r.passed());
  CHECK(r.check("ode.max_abs_g").measured == 0.0);
}

TEST_CASE("reports serialize to CSV and JSON") {
  ExperimentReport r;
  r.kind = "demo";
  r.config = json{{"K", 1}};
  r.checks.push_back(CheckRecord::within("demo.slope", -1.02, -1.0, 0.1));
  r.tables["demo_table"] = Table{{"rho", "value"}, {{1.0, 2.0}, {3.0, 0.5}}};
  r.texts["note.txt"] = "hello\n";
  const auto dir = std::filesystem::temp_directory_path() / "kgscat_report_test";
  std::filesystem::remove_all(dir);
  write_report(r, dir.string(), "csv");
  CHECK(slurp((dir / "checks.csv").string()) ==
        "name,relation,measured,target,tolerance,pass\ndemo.slope,within,-1.02,-1,0.10000000000000001,1\n");
  CHECK(slurp((dir / "demo_table.csv").string()) == "rho,value\n1,2\n3,0.5\n");
  CHECK(slurp((dir / "note.txt").string()) == "hello\n");
  write_report(r, dir.string(), "json");
  const json j = json::parse(slurp((dir / "report.json").string()));
  CHECK(j.at("passed") == true);
  CHECK(j.at("checks").at(0).at("relation") == "within");
  CHECK(j.at("tables").at("demo_table").at("rows").size() == 2);
  CHECK(code_of([&] { write_report(r, dir.string(), "xml"); }) == Errc::ConfigInvalid);
  std::filesystem::remove_all(dir);
}
