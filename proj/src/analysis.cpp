#include "fluxmod/analysis.hpp"

#include <cmath>

namespace fluxmod {

std::vector<double> linspace(double lo, double hi, int count) {
  return Axis{"", lo, hi, count}.values();
}

Table frequency_response(const Device& d, const std::vector<double>& freqs, int k, CoefficientMode mode) {
  const int np = int(d.series ? 2 : d.graph.ports().size());
  Table t;
  t.columns.push_back("f_Hz");
  t.n_axes = 1;
  for (int i = 0; i < np; ++i)
    for (int j = 0; j < np; ++j) {
      const std::string s = "S" + std::to_string(i + 1) + std::to_string(j + 1);
      t.columns.push_back(s + "_dB");
      t.columns.push_back(s + "_deg");
    }
  const int kk = k > 0 ? k : d.k_default;
  for (double f : freqs) {
    std::vector<std::optional<double>> row{f};
    try {
      const FloquetSMatrix s = device_s(d, build_grid(f, d.f_base, kk), mode);
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j) {
          const cdouble v = s(i, 0, j, 0);
          row.push_back(to_db(v));
          row.push_back(std::arg(v) * 180.0 / kPi);
        }
    } catch (const Error& e) {
      if (e.is_solver_failure() || e.kind() == ErrorKind::ZeroFrequencyOnGrid) row.resize(t.columns.size());
      else throw;
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::vector<SpectrumLine> output_spectrum(const Device& d, double f_signal, int k, CoefficientMode mode,
                                          const std::vector<int>& inputs) {
  const int kk = k > 0 ? k : d.k_default;
  const FrequencyGrid grid = build_grid(f_signal, d.f_base, kk);
  const FloquetSMatrix s = device_s(d, grid, mode);
  const int np = s.n_ports();
  std::vector<SpectrumLine> out;
  for (int pin : inputs) {
    if (pin < 0 || pin >= np) throw Error(ErrorKind::InvalidArgument, "input port out of range");
    for (int h = -kk; h <= kk; ++h) {
      SpectrumLine l;
      l.port_in = pin, l.k = h, l.frequency = grid.frequency(h);
      for (int q = 0; q < np; ++q) l.power.push_back(std::norm(s(q, h, pin, 0)));
      out.push_back(std::move(l));
    }
  }
  return out;
}

Table spectrum_table(const std::vector<SpectrumLine>& lines, int n_ports) {
  Table t;
  t.columns = {"in_port", "k", "f_Hz"};
  t.n_axes = 3;
  for (int q = 0; q < n_ports; ++q) t.columns.push_back("P" + std::to_string(q + 1) + "_dB");
  for (const auto& l : lines) {
    std::vector<std::optional<double>> row{double(l.port_in + 1), double(l.k), l.frequency};
    for (double p : l.power) row.push_back(p > 0 ? std::optional<double>(10.0 * std::log10(p)) : std::nullopt);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table oracle_table(const OracleReport& r) {
  Table t;
  t.columns = {"in_port", "out_port", "k", "compared", "spectral_dB", "oracle_dB", "error_dB"};
  t.n_axes = 4;
  for (const auto& row : r.rows) {
    t.rows.push_back({double(row.port_in + 1), double(row.port_out + 1), double(row.k), row.compared ? 1.0 : 0.0,
                      row.spectral_db, row.oracle_db, std::abs(row.spectral_db - row.oracle_db)});
  }
  return t;
}

std::vector<TemplateRow> template_rows() {
  std::vector<TemplateRow> out;
  for (const auto& info : template_catalog())
    for (const auto& [key, v] : info.defaults) out.push_back({info.name, info.summary, key, v});
  return out;
}

}  // namespace fluxmod
