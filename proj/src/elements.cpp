#include "fluxmod/elements.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace fluxmod {

void SquidSpec::validate() const {
  if (!(i_c > 0)) throw Error(ErrorKind::InvalidArgument, "critical current must be > 0");
  if (n_stack < 1) throw Error(ErrorKind::InvalidArgument, "stack count must be >= 1");
  for (const auto& p : pumps) {
    if (p.harmonic < 1) throw Error(ErrorKind::IncommensuratePump, "pump harmonic must be a positive integer");
    if (!(p.amplitude >= 0) || !(p.amplitude < 0.5))
      throw Error(ErrorKind::InvalidArgument, "pump amplitude must lie in [0, 0.5)");
  }
  if (!(peak_flux() <= 0.5 - margin))
    throw Error(ErrorKind::FluxMarginViolated,
                "peak flux " + std::to_string(peak_flux()) + " exceeds 0.5 - margin");
}

double SquidSpec::peak_flux() const {
  double s = std::abs(phi_dc);
  for (const auto& p : pumps) s += p.amplitude;
  return s;
}

SquidSpec SquidSpec::time_shifted(double delta) const {
  SquidSpec out = *this;
  for (auto& p : out.pumps) p.phase += p.harmonic * delta;
  return out;
}

CoefficientMode parse_mode(const std::string& text) {
  std::string s = text;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  if (s == "taylor3") return CoefficientMode::Taylor3;
  if (s == "exact") return CoefficientMode::Exact;
  throw Error(ErrorKind::InvalidArgument, "mode must be taylor3 or exact, got '" + text + "'");
}

const char* to_string(CoefficientMode m) { return m == CoefficientMode::Taylor3 ? "taylor3" : "exact"; }

cdouble FourierLCoefficients::evaluate(double tau) const {
  cdouble s = 0;
  for (int p = -p_max_; p <= p_max_; ++p) s += values_[p + p_max_] * std::polar(1.0, kTwoPi * p * tau);
  return s;
}

namespace {

double stack_gain(const SquidSpec& s) { return 4.0 * kPi * s.i_c / kPhi0 / s.n_stack; }

}  // namespace

double squid_inverse_inductance(const SquidSpec& spec, double flux) {
  return stack_gain(spec) * std::cos(kPi * flux);
}

double squid_inductance(const SquidSpec& spec, double flux) {
  if (!(spec.i_c > 0) || spec.n_stack < 1) throw Error(ErrorKind::InvalidArgument, "bad SQUID spec");
  const double c = std::cos(kPi * flux);
  if (c <= 1e-6) throw Error(ErrorKind::FluxBeyondHalfQuantum, "cos(pi*flux) <= 1e-6");
  return spec.n_stack * kPhi0 / (4.0 * kPi * spec.i_c * c);
}

double squid_inverse_inductance_at(const SquidSpec& spec, double tau) {
  double flux = spec.phi_dc;
  for (const auto& p : spec.pumps) flux += p.amplitude * std::cos(kTwoPi * p.harmonic * tau + p.phase);
  return squid_inverse_inductance(spec, flux);
}

FourierLCoefficients inverse_inductance_coefficients(const SquidSpec& spec, CoefficientMode mode,
                                                     const CoefficientOptions& opt) {
  spec.validate();
  if (opt.p_max < 0) throw Error(ErrorKind::InvalidArgument, "p_max must be >= 0");
  const double kc = stack_gain(spec);

  if (mode == CoefficientMode::Taylor3) {
    if (spec.pumps.size() > 1)
      throw Error(ErrorKind::UnsupportedPumpCount, "taylor3 mode takes at most one pump tone");
    const int m = spec.pumps.empty() ? 1 : spec.pumps[0].harmonic;
    FourierLCoefficients f(std::max(opt.p_max, 3 * m));
    const double c = std::cos(kPi * spec.phi_dc), s = std::sin(kPi * spec.phi_dc);
    if (spec.pumps.empty() || spec.pumps[0].amplitude == 0.0) {
      f[0] = kc * c;
      return f;
    }
    // Third-order expansion of cos(pi*(dc + a*cos(wt + th))) in x = pi*a.
    const double x = kPi * spec.pumps[0].amplitude, th = spec.pumps[0].phase;
    const double f0 = kc * c * (1.0 - x * x / 4.0);
    const double f1 = -0.5 * kc * s * (x - x * x * x / 8.0);
    const double f2 = -0.5 * kc * c * x * x / 4.0;
    const double f3 = 0.5 * kc * s * x * x * x / 24.0;
    const double mags[4] = {f0, f1, f2, f3};
    f[0] = f0;
    for (int p = 1; p <= 3; ++p) {
      f[p * m] = mags[p] * std::polar(1.0, p * th);
      f[-p * m] = mags[p] * std::polar(1.0, -p * th);
    }
    return f;
  }

  bool pumped = false;
  for (const auto& p : spec.pumps) pumped = pumped || p.amplitude != 0.0;
  if (!pumped) {
    FourierLCoefficients f(opt.p_max);
    f[0] = kc * std::cos(kPi * spec.phi_dc);
    return f;
  }

  // Trapezoid rule over one base period; on a periodic integrand this is a DFT.
  int top = opt.p_max;
  for (const auto& p : spec.pumps) top = std::max(top, p.harmonic);
  int n = 1;
  while (n < std::max(opt.min_samples, 16 * (opt.p_max + top))) n <<= 1;

  std::vector<double> y(n);
  for (int i = 0; i < n; ++i) y[i] = squid_inverse_inductance_at(spec, double(i) / n);

  std::vector<cdouble> tw(n);
  for (int i = 0; i < n; ++i) tw[i] = std::polar(1.0, -kTwoPi * double(i) / n);

  FourierLCoefficients f(opt.p_max);
  for (int p = 0; p <= opt.p_max; ++p) {
    // index reduction keeps twiddles exact for large p
    cdouble acc = 0;
    for (int i = 0; i < n; ++i) acc += y[i] * tw[(static_cast<long long>(p) * i) % n];
    acc /= double(n);
    f[p] = acc;
    if (p > 0) f[-p] = std::conj(acc);  // real integrand
  }
  return f;
}

SpectralMatrix squid_spectral_admittance(const FourierLCoefficients& f, const FrequencyGrid& grid) {
  const int n = grid.size();
  SpectralMatrix y = SpectralMatrix::Zero(n, n);
  const int kmax = grid.k_max();
  for (int kin = -kmax; kin <= kmax; ++kin) {
    const cdouble integ = 1.0 / cdouble(0, kTwoPi * grid.frequency(kin));
    for (int kout = -kmax; kout <= kmax; ++kout) {
      const cdouble fp = f(kout - kin);
      if (fp != cdouble(0)) at(y, grid, kout, kin) = fp * integ;
    }
  }
  return y;
}

SpectralMatrix squid_spectral_admittance(const SquidSpec& spec, const FrequencyGrid& grid, CoefficientMode mode) {
  CoefficientOptions opt;
  opt.p_max = 2 * grid.k_max();
  return squid_spectral_admittance(inverse_inductance_coefficients(spec, mode, opt), grid);
}

SpectralMatrix capacitor_spectral_admittance(double c, const FrequencyGrid& grid) {
  SpectralMatrix y = zero_block(grid);
  for (int i = 0; i < grid.size(); ++i) y(i, i) = cdouble(0, kTwoPi * grid.frequencies()[i] * c);
  return y;
}

SpectralMatrix resistor_spectral_admittance(double r, const FrequencyGrid& grid) {
  if (!(r > 0)) throw Error(ErrorKind::NonPositiveResistance, "resistance must be > 0");
  return identity_block(grid) / r;
}

SpectralMatrix inductor_spectral_admittance(double l, const FrequencyGrid& grid) {
  if (!(l > 0)) throw Error(ErrorKind::InvalidArgument, "inductance must be > 0");
  return omega_matrix(grid) / l;
}

}  // namespace fluxmod
