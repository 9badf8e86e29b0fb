#include <json.hpp>

#include "fluxmod/sweep.hpp"
#include "helpers.hpp"

using namespace fluxmod;
using namespace fluxtest;

namespace {

SweepSpec theta_sweep(int jobs) {
  SweepSpec s;
  s.template_name = "isolator3";
  s.axes = {{"theta", -150.0, 150.0, 11}};
  s.metrics = {"IL_fwd", "ISO_rev", "RL"};
  s.analysis.k = 6;
  s.k_gate = false;
  s.jobs = jobs;
  return s;
}

}  // namespace

TEST_SUITE("sweep") {
  TEST_CASE("axis values") {
    CHECK(Axis{"x", 0.0, 1.0, 5}.values() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(Axis{"x", 2.0, 2.0, 1}.values() == std::vector<double>{2.0});
    CHECK_THROWS_AS(Axis({"x", 0.0, 1.0, 0}).values(), Error);
  }

  TEST_CASE("number formatting") {
    CHECK(format_number(-0.00001, 4) == "0.0000");
    CHECK(format_number(1.23456, 4) == "1.2346");
    CHECK(format_number(-20.5, 4) == "-20.5000");
  }

  TEST_CASE("sweeps are deterministic across thread counts") {
    const auto a = to_csv(run_sweep(theta_sweep(1)));
    const auto b = to_csv(run_sweep(theta_sweep(3)));
    const auto c = to_csv(run_sweep(theta_sweep(1)));
    CHECK(a == b);
    CHECK(a == c);
  }

  TEST_CASE("mirrored phase progression exchanges directions") {
    const auto t = run_sweep(theta_sweep(1));
    const int n = int(t.rows.size());
    for (int i = 0; i < n; ++i) {
      const auto& r = t.rows[i];
      const auto& m = t.rows[n - 1 - i];
      REQUIRE(r[0]);
      CHECK(*r[0] == doctest::Approx(-*m[0]));
      CHECK(std::abs(*r[1] - *m[2]) < 1e-9);
    }
  }

  TEST_CASE("csv and json layout") {
    SweepSpec s = theta_sweep(1);
    s.axes = {{"theta", 0.0, 90.0, 2}, {"amp", 0.01, 0.02, 2}};
    s.metrics = {"IL_fwd"};
    auto t = run_sweep(s);
    t.rows[1][2].reset();
    const std::string csv = to_csv(t);
    CHECK(csv.rfind("theta,amp,IL_fwd\n", 0) == 0);
    CHECK(csv.find("\n0,0.02,\n") != std::string::npos);
    const auto j = nlohmann::json::parse(to_json(t));
    CHECK(j["columns"] == nlohmann::json({"theta", "amp", "IL_fwd"}));
    CHECK(j["rows"].size() == 4);
    CHECK(j["rows"][1]["IL_fwd"].is_null());
    CHECK(j["rows"][0]["theta"] == 0.0);
    CHECK(j["k"] == 6);
  }

  TEST_CASE("invalid sweep requests") {
    SweepSpec s = theta_sweep(1);
    s.axes = {{"thetta", 0.0, 90.0, 2}};
    CHECK_THROWS_AS(run_sweep(s), Error);
    s = theta_sweep(1);
    s.metrics = {"gainz"};
    CHECK_THROWS_AS(run_sweep(s), Error);
    s = theta_sweep(1);
    s.template_name = "nosuch";
    CHECK_THROWS_AS(run_sweep(s), Error);
  }

  TEST_CASE("points outside the flux margin leave empty cells") {
    SweepSpec s = theta_sweep(1);
    s.axes = {{"amp", 0.02, 0.3, 3}};
    const auto t = run_sweep(s);
    CHECK(t.rows[0][1].has_value());
    CHECK(!t.rows[2][1].has_value());
  }

  TEST_CASE("harmonic truncation gate") {
    SweepSpec s = theta_sweep(1);
    s.axes = {{"amp", 0.025, 0.04, 2}};
    s.analysis.k = 2;
    s.k_gate = true;
    const auto t = run_sweep(s);
    CHECK(t.k_converged);
    CHECK(t.k_used > 1);
    const Metrics lo = evaluate_template("isolator3", {{"amp", 0.04}}, s.analysis, t.k_used);
    const Metrics hi = evaluate_template("isolator3", {{"amp", 0.04}}, s.analysis, t.k_used + 2);
    CHECK(std::abs(lo.il_fwd - hi.il_fwd) <= 0.05);
    CHECK(std::abs(lo.iso_rev - hi.iso_rev) <= 0.05);
    s.k_limit = 2;
    CHECK(!run_sweep(s).k_converged);
  }

  TEST_CASE("nelder-mead on a bounded quadratic") {
    auto f = [](const std::vector<double>& x) { return std::pow(x[0] - 0.3, 2) + 10 * std::pow(x[1] + 2.0, 2); };
    const auto r = nelder_mead_box(f, {0.0, 0.0}, {-1.0, -1.0}, {1.0, 1.0}, 500);
    CHECK(r.x[0] == doctest::Approx(0.3).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(-1.0));
    CHECK(r.evaluations <= 500);
  }

  TEST_CASE("isolator optimization meets the isolation target with minimal drive") {
    OptimizeSpec s;
    s.template_name = "isolator3";
    s.objective.bounds = {{"amp", 0.005, 0.045}};
    s.analysis.k = 4;
    const auto r = optimize(s);
    CHECK(r.best.at("amp") == doctest::Approx(0.024).epsilon(0.005 / 0.024));
    CHECK(r.metrics.iso_rev >= 20.0 - 1e-3);
    CHECK(r.metrics.il_fwd < 0.5);
    CHECK(!r.trace.empty());
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].objective <= r.trace[i - 1].objective);

    s.objective.iso_target = 0.0;
    const auto z = optimize(s);
    CHECK(z.best.at("amp") == doctest::Approx(0.005).epsilon(1e-3));
  }

  TEST_CASE("optimizer stays inside the flux margin") {
    OptimizeSpec s;
    s.template_name = "isolator3";
    s.objective.bounds = {{"amp", 0.05, 0.3}};
    s.objective.iso_target = 60.0;
    s.analysis.k = 4;
    s.restarts = 2;
    s.max_evals = 60;
    const auto r = optimize(s);
    CHECK(0.35 + r.best.at("amp") <= 0.49 + 1e-12);
    for (const auto& p : r.trace) CHECK(0.35 + p.params.at("amp") <= 0.49 + 1e-12);
  }

  TEST_CASE("optimizer input validation") {
    OptimizeSpec s;
    s.template_name = "isolator3";
    CHECK_THROWS_AS(optimize(s), Error);
    s.objective.bounds = {{"ampp", 0.0, 1.0}};
    CHECK_THROWS_AS(optimize(s), Error);
    s.template_name = "wye1";
    s.objective.bounds = {{"amp", 0.01, 0.03}};
    s.objective.require_stable = true;
    try {
      optimize(s);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnsupportedElement);
    }
  }
}
