#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fluxmod/mna.hpp"
#include "fluxmod/twoport.hpp"

namespace fluxmod {

/// One stage of a series-coupled chain: an inverter or a shunt resonator.
struct SeriesStage {
  enum class Kind { Inverter, Resonator } kind = Kind::Inverter;
  double j = 0.0;  // inverter
  int sign = 1;
  double c = 0.0;  // resonator shunt capacitance
  std::optional<SquidSpec> squid;

  static SeriesStage inverter(double j, int sign = 1) {
    SeriesStage s;
    s.kind = Kind::Inverter, s.j = j, s.sign = sign;
    return s;
  }
  static SeriesStage resonator(double c, std::optional<SquidSpec> sq) {
    SeriesStage s;
    s.kind = Kind::Resonator, s.c = c, s.squid = std::move(sq);
    return s;
  }
};

/// Series chain J0, R1, J1, ..., Rn, Jn between two ports.
struct SeriesNetwork {
  std::vector<SeriesStage> stages;
  double z0 = 50.0;

  TwoPortChain chain(const FrequencyGrid& grid, CoefficientMode mode) const;
  /// Ideal inverters stamped as nodal couplings; ports p1, p2; resonators r1..rn.
  DeviceGraph graph() const;
  /// Capacitive realization of every inverter around f_center.
  DeviceGraph pi_realized(double f_center) const;
  std::vector<SquidSpec*> squids();
};

struct Device {
  std::string name;
  DeviceGraph graph;
  std::optional<SeriesNetwork> series;
  double f_base = 0.0;    // modulation base frequency
  double f_center = 0.0;  // nominal analysis frequency at the present bias
  double f_design = 0.0;  // frequency the inverters were synthesised at
  int k_default = 8;
  CoefficientMode mode_default = CoefficientMode::Exact;
};

// ---- synthesis -------------------------------------------------------------

struct PrototypeDesign {
  double capacitance = 0.0;  // per resonator
  std::vector<double> j;     // order + 1 inverters
};

/// Butterworth g-values g0..g_{n+1}.
std::vector<double> maximally_flat_g(int order);

/// Shunt-resonator / J-inverter bandpass from the maximally flat prototype.  bandwidth is the
/// 1-dB bandwidth; l_resonator is the resonator inductance at the design bias.
PrototypeDesign static_prototype_synthesis(int order, double f_center, double bandwidth, double z0,
                                           double l_resonator);

struct PiInverter {
  double coupling = 0.0;    // series capacitor
  double correction = 0.0;  // to add to each adjacent shunt (negative)
};

/// Internal inverter between resonators: Cc = J/(2 pi f), corrections -Cc.
PiInverter pi_capacitive_inverter(double j, double f_center);

/// Inverter into a resistive port z0: series Cc = J/(w sqrt(1 - (J z0)^2)); the
/// resonator-side correction is -Cc/(1 + (w Cc z0)^2).
PiInverter pi_port_inverter(double j, double f_center, double z0);

/// c + sum(corrections), throwing NegativeAbsorbedCapacitance if the result is <= 0.
double absorb(double c, const std::vector<double>& corrections);

// ---- templates -------------------------------------------------------------

struct IsolatorParams {
  int order = 3;
  double f_center = 6e9;
  double bandwidth = 700e6;
  double z0 = 50.0;
  double i_c = 4e-6;
  int n_stack = 10;
  double phi_dc = 0.35;
  double phi_design = 0.35;
  double amplitude = 0.025;
  double f_mod = 500e6;
  int harmonic = 1;
  double theta = kPi / 2;
  double margin = 0.01;
  std::vector<double> capacitors;  // optional override, one per resonator
  std::vector<double> j_values;    // optional override, order + 1
};

struct CirculatorParams {
  int layers = 1;
  double f_center = 6e9;
  double z0 = 50.0;
  double i_c = 4e-6;
  int n_stack = 10;
  double phi_dc = 0.35;
  double phi_design = 0.35;
  double j_port = 7e-3;  // about sqrt(w0 C B/(f0 z0)) for a 500 MHz external bandwidth; split as 1/sqrt(layers)
  double j_center = 10e-3;
  double amplitude = 0.0358;
  double f_mod = 500e6;
  double theta = 2 * kPi / 3;
  double margin = 0.01;
  std::vector<double> layer_phases;  // default l*2pi/layers
};

struct AmplifierParams {
  double f_center = 6.9e9;
  double bandwidth = 150e6;
  double z0 = 50.0;
  double i_c = 4e-6;
  int n_stack = 10;
  double phi_dc = 0.24;
  double f_base = 200e6;
  double lf_amplitude = 0.0335;
  int lf_harmonic = 1;
  double lf_step = kPi / 2;  // 0, 90, 180 deg
  double pump_amplitude = 0.0397;
  double pump_frequency = 13.8e9;
  double pump_phase = 0.0;
  double margin = 0.01;
};

Device isolator_template(const IsolatorParams& p);
Device circulator_template(const CirculatorParams& p);
Device amplifier_template(const AmplifierParams& p);

/// Resonator frequency shift with bias at fixed capacitance.
double tuned_center(double f_design, double phi_dc, double phi_design);

/// Isolator built from the fabricated capacitor set: C1 port coupling, C2 internal
/// coupling, C3 outer shunt, C4 middle shunt.
Device isolator_from_capacitors(double c1, double c2, double c3, double c4, const IsolatorParams& p);

// ---- named access ----------------------------------------------------------

using ParamMap = std::map<std::string, double>;

struct TemplateInfo {
  std::string name;
  std::string summary;
  ParamMap defaults;
};

const std::vector<TemplateInfo>& template_catalog();
bool is_template(const std::string& name);
/// Unknown keys raise InvalidArgument.  Angles are in degrees, frequencies in Hz.
Device make_template(const std::string& name, const ParamMap& overrides);
ParamMap template_defaults(const std::string& name);

}  // namespace fluxmod
