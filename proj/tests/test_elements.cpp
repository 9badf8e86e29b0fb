#include <cmath>

#include "helpers.hpp"

using namespace fluxmod;
using namespace fluxtest;

namespace {

// Jacobi-Anger expansion of 4 pi Ic/(Phi0 n) cos(pi (dc + a cos(u + theta))).
cdouble bessel_coefficient(const SquidSpec& s, int p) {
  const double kc = 4 * kPi * s.i_c / kPhi0 / s.n_stack;
  const double x = kPi * s.pumps.at(0).amplitude;
  const double th = s.pumps.at(0).phase;
  const double c = std::cos(kPi * s.phi_dc), sn = std::sin(kPi * s.phi_dc);
  const int m = std::abs(p);
  const double jm = std::cyl_bessel_j(double(m), x);
  // cos(A + B) with B = x cos(u): cos B -> even orders, sin B -> odd orders
  double mag;
  if (m % 2 == 0) mag = c * jm * (m == 0 ? 1.0 : ((m / 2) % 2 ? -1.0 : 1.0));
  else mag = -sn * jm * (((m - 1) / 2) % 2 ? -1.0 : 1.0);
  return kc * mag * std::polar(1.0, p * th);
}

double rel(cdouble a, cdouble b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_SUITE("elements") {
  TEST_CASE("SQUID inductance") {
    CHECK(squid_inductance(squid(0.0, 1), 0.0) == doctest::Approx(41.14e-12).epsilon(1e-3));
    CHECK(squid_inductance(squid(0.35, 10), 0.35) == doctest::Approx(906e-12).epsilon(1e-3));
    CHECK(squid_inductance(squid(0.0, 1), 0.0) == doctest::Approx(kPhi0 / (4 * kPi * 4e-6)).epsilon(1e-12));
    try {
      squid_inductance(squid(0.0, 1), 0.5);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::FluxBeyondHalfQuantum);
    }
  }

  TEST_CASE("flux margin and pump validation") {
    CHECK_NOTHROW(squid(0.35, 10, 0.025).validate());
    auto bad = squid(0.45, 10, 0.045);
    try {
      bad.validate();
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::FluxMarginViolated);
    }
    auto zero_h = squid(0.3, 10, 0.02, 0.0, 0);
    CHECK_THROWS_AS(zero_h.validate(), Error);
    auto s = squid(0.3, 10, 0.02);
    s.i_c = 0;
    CHECK_THROWS_AS(s.validate(), Error);
  }

  TEST_CASE("unmodulated coefficients are the static inverse inductance") {
    for (auto mode : {CoefficientMode::Taylor3, CoefficientMode::Exact}) {
      const auto s = squid(0.35, 10);
      const auto f = inverse_inductance_coefficients(s, mode);
      CHECK(rel(f(0), 1.0 / squid_inductance(s, 0.35)) < 1e-12);
      for (int p = 1; p <= 3; ++p) {
        CHECK(std::abs(f(p)) == 0.0);
        CHECK(std::abs(f(-p)) == 0.0);
      }
    }
  }

  TEST_CASE("zero bias kills odd orders") {
    for (auto mode : {CoefficientMode::Taylor3, CoefficientMode::Exact}) {
      const auto f = inverse_inductance_coefficients(squid(0.0, 10, 0.025, 0.4), mode);
      const double ref = std::abs(f(0));
      for (int p : {-3, -1, 1, 3}) CHECK(std::abs(f(p)) <= 1e-14 * ref);
      CHECK(std::abs(f(2)) > 0);
    }
  }

  TEST_CASE("exact coefficients match the Bessel expansion") {
    for (double dc : {0.1, 0.24, 0.35}) {
      for (double amp : {0.01, 0.025, 0.1}) {
        const auto s = squid(dc, 10, amp, 0.9);
        CoefficientOptions o;
        o.p_max = 5;
        const auto f = inverse_inductance_coefficients(s, CoefficientMode::Exact, o);
        const double ref = std::abs(f(0));
        for (int p = -5; p <= 5; ++p) CHECK(std::abs(f(p) - bessel_coefficient(s, p)) <= 1e-11 * ref);
      }
    }
  }

  TEST_CASE("taylor3 agrees with quadrature at the isolator operating point") {
    const auto s = squid(0.35, 10, 0.025, kPi / 2);
    const auto t = inverse_inductance_coefficients(s, CoefficientMode::Taylor3);
    const auto e = inverse_inductance_coefficients(s, CoefficientMode::Exact);
    for (int p : {-1, 0, 1}) CHECK(rel(t(p), e(p)) < 0.005);
    for (int p : {-3, -2, 2, 3}) CHECK(rel(t(p), e(p)) < 0.05);
  }

  TEST_CASE("taylor3 rejects two-tone pumps") {
    auto s = squid(0.24, 10, 0.02);
    s.pumps.push_back({0.03, 69, 0.0});
    try {
      inverse_inductance_coefficients(s, CoefficientMode::Taylor3);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::UnsupportedPumpCount);
    }
    CoefficientOptions o;
    o.p_max = 140;
    CHECK_NOTHROW(inverse_inductance_coefficients(s, CoefficientMode::Exact, o));
  }

  TEST_CASE("time reconstruction of exact coefficients is real") {
    auto s = squid(0.3, 10, 0.04, 1.1);
    s.pumps.push_back({0.02, 3, -0.4});
    CoefficientOptions o;
    o.p_max = 24;
    const auto f = inverse_inductance_coefficients(s, CoefficientMode::Exact, o);
    for (int i = 0; i < 128; ++i) {
      const double tau = i / 128.0;
      const cdouble v = f.evaluate(tau);
      CHECK(std::abs(v.imag()) <= 1e-10 * std::abs(v));
      CHECK(v.real() == doctest::Approx(squid_inverse_inductance_at(s, tau)).epsilon(1e-10));
    }
  }

  TEST_CASE("taylor3 F0 falls with modulation depth") {
    double last = 1e300;
    for (int i = 0; i <= 40; ++i) {
      const double amp = 0.001 * i;
      const auto f = inverse_inductance_coefficients(squid(0.3, 10, amp > 0 ? amp : 0.0), CoefficientMode::Taylor3);
      if (i > 0) CHECK(f(0).real() < last);
      last = f(0).real();
    }
  }

  TEST_CASE("doubling quadrature samples leaves coefficients unchanged") {
    const auto s = squid(0.35, 10, 0.08, 0.3);
    CoefficientOptions a, b;
    a.p_max = b.p_max = 6;
    b.min_samples = 2 * a.min_samples;
    const auto fa = inverse_inductance_coefficients(s, CoefficientMode::Exact, a);
    const auto fb = inverse_inductance_coefficients(s, CoefficientMode::Exact, b);
    const double ref = std::abs(fa(0));
    for (int p = -6; p <= 6; ++p) CHECK(std::abs(fa(p) - fb(p)) <= 1e-9 * ref);
  }

  TEST_CASE("static SQUID admittance equals the inductor admittance") {
    const auto g = build_grid(6e9, 0.5e9, 4);
    const auto s = squid(0.35, 10);
    for (auto mode : {CoefficientMode::Taylor3, CoefficientMode::Exact}) {
      const auto y = squid_spectral_admittance(s, g, mode);
      const auto yl = inductor_spectral_admittance(squid_inductance(s, 0.35), g);
      CHECK(rel_diff(y, yl) < 1e-14);
      CHECK((y - SpectralMatrix(y.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("conversion matrix layout for one tone") {
    const double th = 0.6;
    const auto s = squid(0.35, 10, 0.025, th);
    const auto g = build_grid(6e9, 0.7e9, 1);
    const auto f = inverse_inductance_coefficients(s, CoefficientMode::Taylor3);
    const auto y = squid_spectral_admittance(f, g);
    // F_p already carries exp(j p theta); the divisor is the frequency of the input column
    const auto f_zero = inverse_inductance_coefficients(squid(0.35, 10, 0.025, 0.0), CoefficientMode::Taylor3);
    CHECK(std::abs(f(1) - f_zero(1) * std::polar(1.0, th)) < 1e-12 * std::abs(f(1)));
    CHECK(std::abs(at(y, g, 0, -1) - f(1) / cdouble(0, kTwoPi * g.frequency(-1))) < 1e-12 * std::abs(at(y, g, 0, -1)));
    CHECK(std::abs(at(y, g, 0, 1) - f(-1) / cdouble(0, kTwoPi * g.frequency(1))) < 1e-12 * std::abs(at(y, g, 0, 1)));
    CHECK(std::abs(at(y, g, 1, -1) - f(2) / cdouble(0, kTwoPi * g.frequency(-1))) < 1e-12 * std::abs(at(y, g, 1, -1)));
  }

  TEST_CASE("common phase shift multiplies entry (k, k-p) by exp(j p delta)") {
    const auto g = build_grid(6e9, 0.5e9, 3);
    const double delta = 0.77;
    for (auto mode : {CoefficientMode::Taylor3, CoefficientMode::Exact}) {
      const auto s = squid(0.35, 10, 0.03, 0.2);
      const auto y0 = squid_spectral_admittance(s, g, mode);
      const auto y1 = squid_spectral_admittance(s.time_shifted(delta), g, mode);
      for (int k = -3; k <= 3; ++k)
        for (int q = -3; q <= 3; ++q) {
          const int p = k - q;
          const cdouble want = at(y0, g, k, q) * std::polar(1.0, p * delta);
          CHECK(std::abs(at(y1, g, k, q) - want) <= 1e-12 * std::abs(y0(g.index(0), g.index(0))));
        }
    }
  }

  TEST_CASE("capacitor and resistor blocks") {
    const auto g = build_grid(6e9, 0.5e9, 0);
    CHECK(std::abs(capacitor_spectral_admittance(257e-15, g)(0, 0) - cdouble(0, kTwoPi * 6e9 * 257e-15)) < 1e-18);
    CHECK(capacitor_spectral_admittance(0.0, g).cwiseAbs().maxCoeff() == 0.0);
    const auto g2 = build_grid(6e9, 0.5e9, 2);
    CHECK(max_abs_diff(capacitor_spectral_admittance(-100e-15, g2), -capacitor_spectral_admittance(100e-15, g2)) == 0.0);
    CHECK(std::abs(resistor_spectral_admittance(50.0, g2)(3, 3) - 0.02) < 1e-16);
    CHECK(std::abs(resistor_spectral_admittance(1.0, g2)(0, 0) - 1.0) == 0.0);
    CHECK(resistor_spectral_admittance(50.0, g2)(0, 1) == cdouble(0));
    try {
      resistor_spectral_admittance(0.0, g2);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NonPositiveResistance);
    }
  }

  TEST_CASE("mode names") {
    CHECK(parse_mode("taylor3") == CoefficientMode::Taylor3);
    CHECK(parse_mode("EXACT") == CoefficientMode::Exact);
    CHECK_THROWS_AS(parse_mode("bessel"), Error);
  }
}
