#include <random>

#include "fluxmod/tdoracle.hpp"
#include "helpers.hpp"

using namespace fluxmod;
using namespace fluxtest;

namespace {

DeviceGraph tank(double c, double l, double r = 0.0) {
  DeviceGraph d;
  const int a = d.add_node("a");
  d.add_capacitor("c", a, c);
  d.add_inductor("l", a, l);
  if (r > 0) d.add_resistor("r", a, r);
  return d;
}

double tank_energy(const Eigen::VectorXd& x, double c, double l) { return 0.5 * c * x[0] * x[0] + 0.5 * x[1] * x[1] / l; }

}  // namespace

TEST_SUITE("tdoracle") {
  TEST_CASE("lossless tank rings at its resonance") {
    const double c = 1e-12, l = 1e-9;
    const auto ss = build_state_space(tank(c, l), 0.0);
    LtvIntegrator integ(ss, {});
    const double period = kTwoPi * std::sqrt(l * c);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    x[0] = 1.0;
    double t = 0.0;
    integ.advance(x, t, period / 2);
    CHECK(x[0] == doctest::Approx(-1.0).epsilon(1e-6));
    integ.advance(x, t, 20 * period);
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(tank_energy(x, c, l) == doctest::Approx(0.5 * c).epsilon(1e-6));
  }

  TEST_CASE("damped tank loses energy at the RC rate") {
    const double c = 1e-12, l = 1e-9, r = 1e3;
    const auto ss = build_state_space(tank(c, l, r), 0.0);
    LtvIntegrator integ(ss, {});
    const double period = kTwoPi * std::sqrt(l * c);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    x[0] = 1.0;
    double t = 0.0;
    const double e0 = tank_energy(x, c, l);
    for (int n : {5, 10, 20}) {
      integ.advance(x, t, n * period);
      CHECK(tank_energy(x, c, l) / e0 == doctest::Approx(std::exp(-t / (r * c))).epsilon(0.02));
    }
  }

  TEST_CASE("harmonic extraction") {
    const auto g = build_grid(6.1e9, 0.5e9, 2);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    SpectralVector want(g.size());
    for (int i = 0; i < g.size(); ++i) want[i] = cdouble(n(rng), n(rng));
    std::vector<double> t;
    Eigen::VectorXd w(400);
    for (int i = 0; i < 400; ++i) {
      t.push_back(i * 20e-9 / 400 + 3e-9);
      double acc = 0;
      for (int k = -2; k <= 2; ++k) acc += std::real(want[g.index(k)] * std::exp(cdouble(0, kTwoPi * g.frequency(k) * t[i])));
      w[i] = acc;
    }
    CHECK((extract_harmonics(t, w, g) - want).cwiseAbs().maxCoeff() < 1e-9);

    const auto single = build_grid(6e9, 0.5e9, 0);
    std::vector<double> ts;
    Eigen::VectorXd ws(64);
    for (int i = 0; i < 64; ++i) {
      ts.push_back(i * 2e-9 / 64);
      ws[i] = 0.3 * std::cos(kTwoPi * 6e9 * ts[i] + 0.4);
    }
    const auto v = extract_harmonics(ts, ws, single);
    CHECK(std::abs(v[0] - std::polar(0.3, 0.4)) < 1e-12);
  }

  TEST_CASE("matched termination sees half the source") {
    DeviceGraph d;
    const int a = d.add_node("a");
    d.add_capacitor("c", a, 1e-15);
    d.add_resistor("r", a, 50.0);
    d.add_port(a, 50.0);
    const auto ss = build_state_space(d, 0.0);
    const auto g = build_grid(6e9, 0.5e9, 1);
    const auto w = integrate_to_steady_state(ss, {0, 6e9, 1.0}, g);
    const auto v = extract_harmonics(w.t, w.v.col(0), g);
    CHECK(std::abs(v[g.index(0)]) == doctest::Approx(std::sqrt(50.0)).epsilon(0.005));
    CHECK(std::abs(v[g.index(1)]) < 1e-6);
  }

  TEST_CASE("common period") {
    CHECK(common_period(6e9, 0.5e9) == doctest::Approx(2e-9));
    CHECK(common_period(6.05e9, 0.5e9) == doctest::Approx(2e-8));
    CHECK(common_period(6e9 + 1e3, 0.5e9) == 0.0);
  }

  TEST_CASE("ideal inverters need a realization") {
    const Device d = make_template("isolator3", {});
    try {
      build_state_space(d.graph, d.f_base);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnsupportedElement);
    }
    CHECK_NOTHROW(build_state_space(d.series->pi_realized(d.f_design), d.f_base));
  }

  TEST_CASE("modulated networks settle and stay stable") {
    for (const char* name : {"isolator2", "isolator3", "isolator4"}) {
      CAPTURE(name);
      const Device d = make_template(name, {});
      const auto ss = build_state_space(d.series->pi_realized(d.f_design), d.f_base);
      CHECK(floquet_spectral_radius(ss) < 1.0);
    }
    const Device amp = make_template("diramp", {});
    const auto ss = build_state_space(amp.series->pi_realized(amp.f_design), amp.f_base);
    CHECK(floquet_spectral_radius(ss) < 1.0);
    const Device hot = make_template("diramp", {{"bw", 465e6}, {"lfamp", 0.0545}, {"pumpamp", 0.0766}});
    CHECK(floquet_spectral_radius(build_state_space(hot.series->pi_realized(hot.f_design), hot.f_base)) > 1.0);
  }

  TEST_CASE("isolators agree with the spectral solver") {
    for (const char* name : {"isolator2", "isolator3"}) {
      CAPTURE(name);
      const Device d = make_template(name, {});
      const auto rep = oracle_compare(d, d.f_center, 4);
      CHECK(rep.realization == "pi-capacitive");
      CHECK(rep.pass);
      CHECK(rep.max_error_db <= 0.1);
      int compared = 0;
      for (const auto& r : rep.rows) compared += r.compared;
      CHECK(compared >= 10);
    }
  }

  TEST_CASE("static network conserves power") {
    const Device d = make_template("isolator3", {{"amp", 0.0}});
    OracleOptions o;
    o.input_ports = {0};
    o.floor_db = -300;
    const auto rep = oracle_compare(d, d.f_center + 0.1e9, 1, o);
    double out = 0.0;
    for (const auto& r : rep.rows) out += std::pow(10.0, r.oracle_db / 10.0);
    CHECK(out == doctest::Approx(1.0).epsilon(0.005));
  }
}
