#pragma once

#include <vector>

#include "fluxmod/sweep.hpp"
#include "fluxmod/tdoracle.hpp"

namespace fluxmod {

/// Evenly spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

/// f_Hz then S{i}{j}_dB and S{i}{j}_deg at harmonic (0,0) for every port pair (1-based).
/// Frequencies where the solve fails leave empty cells.
Table frequency_response(const Device& d, const std::vector<double>& freqs, int k, CoefficientMode mode);

struct SpectrumLine {
  int port_in = 0;  // 0-based
  int k = 0;
  double frequency = 0.0;
  std::vector<double> power;  // |S(p_out,k; p_in,0)|^2 per output port
};

/// Output power per harmonic and port for a unit drive at harmonic 0 of each listed input port.
std::vector<SpectrumLine> output_spectrum(const Device& d, double f_signal, int k, CoefficientMode mode,
                                          const std::vector<int>& inputs);
/// in_port, k, f_Hz, P{p}_dB (input ports 1-based).
Table spectrum_table(const std::vector<SpectrumLine>& lines, int n_ports);

/// in_port, out_port, k, compared, spectral_dB, oracle_dB, error_dB.
Table oracle_table(const OracleReport& r);

/// template, parameter, default.
struct TemplateRow {
  std::string name, summary, parameter;
  double value = 0.0;
};
std::vector<TemplateRow> template_rows();

}  // namespace fluxmod
