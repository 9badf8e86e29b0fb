#pragma once

#include <vector>

#include "fluxmod/spectral.hpp"

namespace fluxmod {

inline constexpr double kPhi0 = 2.067833848e-15;  // Wb

struct PumpTone {
  double amplitude = 0.0;  // flux, units of Phi0
  int harmonic = 1;        // tone frequency = harmonic * f_base
  double phase = 0.0;      // radians

  bool operator==(const PumpTone&) const = default;
};

struct SquidSpec {
  double i_c = 4e-6;  // per junction pair
  int n_stack = 1;
  double phi_dc = 0.0;  // units of Phi0
  std::vector<PumpTone> pumps;
  double margin = 0.01;

  /// Throws when any field is out of range or the flux excursion leaves the margin.
  void validate() const;
  /// |phi_dc| + sum of pump amplitudes.
  double peak_flux() const;
  /// A copy with every pump phase shifted by harmonic*delta (time-origin shift).
  SquidSpec time_shifted(double delta) const;

  bool operator==(const SquidSpec&) const = default;
};

enum class CoefficientMode { Taylor3, Exact };

CoefficientMode parse_mode(const std::string& s);
const char* to_string(CoefficientMode m);

/// Fourier coefficients of 1/L(t) in powers of exp(j*p*2*pi*f_base*t), p = -P..P.
/// Pump phases are already folded in.
class FourierLCoefficients {
 public:
  FourierLCoefficients() = default;
  explicit FourierLCoefficients(int p_max) : p_max_(p_max), values_(2 * p_max + 1, cdouble(0)) {}

  int p_max() const { return p_max_; }
  cdouble operator()(int p) const { return (p < -p_max_ || p > p_max_) ? cdouble(0) : values_[p + p_max_]; }
  cdouble& operator[](int p) { return values_.at(p + p_max_); }

  /// sum_p F_p exp(j p 2 pi t/T) at normalized time tau = t/T.
  cdouble evaluate(double tau) const;

 private:
  int p_max_ = 0;
  std::vector<cdouble> values_;
};

double squid_inductance(const SquidSpec& spec, double flux);

/// 1/L at a given instantaneous flux.
double squid_inverse_inductance(const SquidSpec& spec, double flux);

/// 1/L(t) at normalized time tau = t * f_base, straight from the closed form.
double squid_inverse_inductance_at(const SquidSpec& spec, double tau);

struct CoefficientOptions {
  int p_max = 3;
  int min_samples = 4096;
};

FourierLCoefficients inverse_inductance_coefficients(const SquidSpec& spec, CoefficientMode mode,
                                                     const CoefficientOptions& opt = {});

/// Conversion matrix: entry(k, q) = F_{k-q} / (j 2 pi f_q).
SpectralMatrix squid_spectral_admittance(const FourierLCoefficients& f, const FrequencyGrid& grid);
SpectralMatrix squid_spectral_admittance(const SquidSpec& spec, const FrequencyGrid& grid, CoefficientMode mode);

SpectralMatrix capacitor_spectral_admittance(double c, const FrequencyGrid& grid);
SpectralMatrix resistor_spectral_admittance(double r, const FrequencyGrid& grid);
SpectralMatrix inductor_spectral_admittance(double l, const FrequencyGrid& grid);

}  // namespace fluxmod
