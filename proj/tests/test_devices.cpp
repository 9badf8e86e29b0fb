#include "helpers.hpp"

using namespace fluxmod;
using namespace fluxtest;

TEST_SUITE("devices") {
  TEST_CASE("capacitive pi inverter") {
    const auto pi = pi_capacitive_inverter(2.5e-3, 6e9);
    CHECK(pi.coupling == doctest::Approx(66.315e-15).epsilon(1e-4));
    CHECK(pi.correction == -pi.coupling);
    CHECK(absorb(300e-15, {pi.correction}) == doctest::Approx(233.685e-15).epsilon(1e-4));
    try {
      absorb(50e-15, {pi.correction});
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NegativeAbsorbedCapacitance);
    }
    CHECK_THROWS_AS(pi_capacitive_inverter(0.0, 6e9), Error);
  }

  TEST_CASE("port pi inverter matches the ideal inverter at the design frequency") {
    const double j = 0.012, f = 6e9, z0 = 50.0;
    const auto pi = pi_port_inverter(j, f, z0);
    // load z0 seen through series Cc then shunt correction equals J^2 z0 conductance
    const cdouble zs(z0, -1.0 / (kTwoPi * f * pi.coupling));
    const cdouble y = 1.0 / zs + cdouble(0, kTwoPi * f * pi.correction);
    CHECK(std::abs(y - cdouble(j * j * z0, 0)) < 1e-12);
    CHECK_THROWS_AS(pi_port_inverter(0.03, f, z0), Error);
  }

  TEST_CASE("maximally flat prototype") {
    const auto g = maximally_flat_g(3);
    CHECK(g[1] == doctest::Approx(1.0));
    CHECK(g[2] == doctest::Approx(2.0));
    CHECK(g[3] == doctest::Approx(1.0));
    const auto d = static_prototype_synthesis(3, 6e9, 700e6, 50.0, 1e-9);
    CHECK(d.j.size() == 4);
    CHECK(d.j.front() == doctest::Approx(d.j.back()));
    CHECK(d.j[1] == doctest::Approx(d.j[2]));
    CHECK(d.capacitance == doctest::Approx(1.0 / (std::pow(kTwoPi * 6e9, 2) * 1e-9)));
    const auto narrow = static_prototype_synthesis(3, 6e9, 700e3, 50.0, 1e-9);
    CHECK(narrow.j[1] / d.j[1] == doctest::Approx(1e-3));
    CHECK(narrow.j[0] / d.j[0] == doctest::Approx(std::sqrt(1e-3)));
  }

  TEST_CASE("template structure") {
    for (int order = 2; order <= 4; ++order) {
      IsolatorParams p;
      p.order = order;
      const Device d = isolator_template(p);
      REQUIRE(d.series);
      CHECK(int(d.series->stages.size()) == 2 * order + 1);
      CHECK(d.graph.node_count() == order + 2);
      CHECK(d.graph.ports().size() == 2);
    }
    for (int layers = 1; layers <= 3; ++layers) {
      CirculatorParams p;
      p.layers = layers;
      const Device d = circulator_template(p);
      CHECK(!d.series);
      CHECK(d.graph.node_count() == 3 + 4 * layers);
      CHECK(d.graph.ports().size() == 3);
    }
  }

  TEST_CASE("bias tuning") {
    CHECK(tuned_center(6e9, 0.35, 0.35) == 6e9);
    CHECK(tuned_center(6e9, 0.30, 0.35) > 6e9);
    CHECK(tuned_center(6e9, 0.40, 0.35) < 6e9);
    IsolatorParams p;
    p.amplitude = 0.0;
    p.phi_dc = 0.31;
    const Device d = isolator_template(p);
    const auto g = build_grid(d.f_center, p.f_mod, 1);
    const auto s = chain_s(d.series->chain(g, CoefficientMode::Exact));
    CHECK(std::abs(s(1, 0, 0, 0)) > 0.99);
  }

  TEST_CASE("every catalog template builds and is reciprocal when static") {
    for (const auto& t : template_catalog()) {
      CAPTURE(t.name);
      ParamMap off;
      for (const char* key : {"amp", "lfamp", "pumpamp"})
        if (t.defaults.count(key)) off[key] = 0.0;
      const Device d = make_template(t.name, off);
      CHECK_NOTHROW(d.graph.validate());
      const auto g = build_grid(d.f_center + 37e6, d.f_base, 2);
      const auto s = solve_floquet_s(d.graph, g).matrix();
      CHECK(max_abs_diff(s, s.transpose()) < 1e-9);
      CHECK(make_template(t.name, {}).name == d.name);
    }
    CHECK_THROWS_AS(make_template("isolator3", {{"nonsense", 1.0}}), Error);
    CHECK_THROWS_AS(make_template("nosuch", {}), Error);
    CHECK(is_template("wye2"));
    CHECK(!is_template("wye9"));
  }

  TEST_CASE("catalog names") {
    std::vector<std::string> names;
    for (const auto& t : template_catalog()) names.push_back(t.name);
    CHECK(names == std::vector<std::string>{"isolator2", "isolator3", "isolator4", "wye1", "wye2", "wye3", "diramp"});
  }

  TEST_CASE("amplifier pump bookkeeping") {
    const Device d = make_template("diramp", {});
    REQUIRE(d.series);
    const auto sq = d.series->stages[1].squid;
    REQUIRE(sq);
    REQUIRE(sq->pumps.size() == 2);
    CHECK(sq->pumps[1].harmonic == 69);
    CHECK(d.series->stages[3].squid->pumps[0].phase == doctest::Approx(kPi / 2));
    CHECK(d.series->stages[5].squid->pumps[0].phase == doctest::Approx(kPi));
    try {
      make_template("diramp", {{"fpump", 13.85e9}});
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IncommensuratePump);
    }
  }

  TEST_CASE("unpumped amplifier is passive") {
    const Device d = make_template("diramp", {{"pumpamp", 0.0}});
    for (double f = 6.7e9; f <= 7.1e9; f += 0.05e9) {
      const auto g = build_grid(f, d.f_base, 8);
      const auto s = chain_s(d.series->chain(g, CoefficientMode::Exact));
      CHECK(to_db(s(1, 0, 0, 0)) <= 1e-9);
      CHECK(to_db(s(0, 0, 1, 0)) <= 1e-9);
    }
  }

  TEST_CASE("pumped amplifier gains forward") {
    const Device d = make_template("diramp", {});
    const auto g = build_grid(6.887e9, d.f_base, 80);
    const auto s = chain_s(d.series->chain(g, CoefficientMode::Exact));
    CHECK(to_db(s(1, 0, 0, 0)) > 8.0);
    CHECK(to_db(s(1, 0, 0, 0)) - to_db(s(0, 0, 1, 0)) > 15.0);
  }

  TEST_CASE("third-order isolator at its defaults") {
    const Device d = make_template("isolator3", {});
    const auto g = build_grid(d.f_center, d.f_base, 8);
    const auto s = chain_s(d.series->chain(g, CoefficientMode::Exact));
    CHECK(-to_db(s(1, 0, 0, 0)) < 1.0);
    CHECK(-to_db(s(0, 0, 1, 0)) > 20.0);
    CHECK(to_db(s(0, 0, 0, 0)) < -10.0);
  }

  TEST_CASE("flux excursion guard") {
    try {
      make_template("isolator3", {{"dc", 0.45}, {"amp", 0.06}});
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK((e.kind() == ErrorKind::FluxMarginViolated || e.kind() == ErrorKind::FluxBeyondHalfQuantum));
    }
  }
}
