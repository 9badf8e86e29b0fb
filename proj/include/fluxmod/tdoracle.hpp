#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fluxmod/devices.hpp"
#include "fluxmod/mna.hpp"

namespace fluxmod {

/// Inductive branch carrying flux phi: i = Gamma(t) * phi, dphi/dt = v_a - v_b.
struct InductiveBranch {
  int a = 0;
  int b = kGround;
  bool modulated = false;
  double inverse_l = 0.0;  // static branches
  SquidSpec squid;         // modulated branches
};

/// C dv/dt = -G v - sum_b inc_b Gamma_b(t) phi_b + i_src(t),  dphi/dt = inc^T v.
struct StateSpaceLtv {
  int n_nodes = 0;
  Eigen::MatrixXd c;  // capacitance matrix
  Eigen::MatrixXd g;  // conductance matrix, port terminations included
  std::vector<InductiveBranch> branches;
  std::vector<Port> ports;
  double f_base = 0.0;
  std::string realization = "as-given";

  int dim() const { return n_nodes + int(branches.size()); }
  double inverse_inductance(const InductiveBranch& br, double t) const;
};

StateSpaceLtv build_state_space(const DeviceGraph& device, double f_base);

/// Sinusoidal incident wave of amplitude `amplitude` at one port.
struct Drive {
  int port = 0;
  double frequency = 0.0;
  double amplitude = 1.0;
};

struct IntegrationOptions {
  double rtol = 1e-9;
  double atol = 1e-12;       // volts / webers scale is set internally
  double tolerance = 1e-3;   // window-to-window change of the projection, relative
  int max_periods = 500;     // pump periods
  int samples_per_window = 0;
  double window = 0.0;       // 0: smallest common period of signal and pump, else 1/f_base
};

struct Waveforms {
  std::vector<double> t;        // last window
  Eigen::MatrixXd v;            // samples x nodes
  double window = 0.0;
  double elapsed = 0.0;
  int windows = 0;
  double pump_periods = 0.0;
};

class LtvIntegrator {
 public:
  LtvIntegrator(const StateSpaceLtv& ss, const std::vector<Drive>& drives, IntegrationOptions opt = {});

  /// Advance from t to t_end, landing exactly on t_end.
  void advance(Eigen::VectorXd& x, double& t, double t_end) const;
  void derivative(double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) const;

  const IntegrationOptions& options() const { return opt_; }

 private:
  const StateSpaceLtv& ss_;
  std::vector<Drive> drives_;
  IntegrationOptions opt_;
  Eigen::LLT<Eigen::MatrixXd> c_llt_;
  mutable double h_ = 0.0;
};

/// Run until the harmonic projection of every port voltage settles.
Waveforms integrate_to_steady_state(const StateSpaceLtv& ss, const Drive& drive, const FrequencyGrid& grid,
                                    const IntegrationOptions& opt = {});

/// Least-squares phasors V_k with w(t) ~ Re sum_k V_k exp(j 2 pi f_k t).
SpectralVector extract_harmonics(const std::vector<double>& t, const Eigen::VectorXd& w, const FrequencyGrid& grid);

/// Largest Floquet multiplier magnitude over one pump period of the undriven network;
/// below 1 means small-signal stable.
double floquet_spectral_radius(const StateSpaceLtv& ss, const IntegrationOptions& opt = {});

/// Smallest window holding an integer number of periods of both signal and pump, or 0.
double common_period(double f_signal, double f_base, int max_ratio = 64);

struct OracleRow {
  int port_in = 0;
  int port_out = 0;
  int k = 0;
  double spectral_db = 0.0;
  double oracle_db = 0.0;
  bool compared = false;  // above the floor
};

struct OracleOptions {
  IntegrationOptions integration;
  double floor_db = -40.0;
  double tolerance_db = 0.1;
  bool pi_realize = true;
  std::vector<int> input_ports;  // empty: all ports
};

struct OracleReport {
  std::string realization;
  std::vector<OracleRow> rows;
  double max_error_db = 0.0;
  bool pass = false;
};

/// Spectral (exact mode) vs time-domain harmonics on the same network.
OracleReport oracle_compare(const Device& device, double f_signal, int k_max, const OracleOptions& opt = {});

}  // namespace fluxmod
