#pragma once

#include <cmath>

#include "fluxmod/spectral.hpp"

namespace fluxmod {

/// Scattering over (port, harmonic) pairs.  Rows are outputs, columns inputs; the
/// flat index of (port p, harmonic k) is p*(2K+1) + grid.index(k).  Ports are 0-based.
class FloquetSMatrix {
 public:
  FloquetSMatrix() = default;
  FloquetSMatrix(int n_ports, FrequencyGrid grid)
      : n_ports_(n_ports),
        grid_(std::move(grid)),
        s_(SpectralMatrix::Zero(n_ports * grid_.size(), n_ports * grid_.size())) {}

  int n_ports() const { return n_ports_; }
  const FrequencyGrid& grid() const { return grid_; }
  const SpectralMatrix& matrix() const { return s_; }
  SpectralMatrix& matrix() { return s_; }

  int flat(int port, int k) const { return port * grid_.size() + grid_.index(k); }

  cdouble operator()(int p_out, int k_out, int p_in, int k_in) const {
    return s_(flat(p_out, k_out), flat(p_in, k_in));
  }
  cdouble& operator()(int p_out, int k_out, int p_in, int k_in) { return s_(flat(p_out, k_out), flat(p_in, k_in)); }

  /// Harmonic block between two ports.
  SpectralMatrix block(int p_out, int p_in) const {
    const int n = grid_.size();
    return s_.block(p_out * n, p_in * n, n, n);
  }
  void set_block(int p_out, int p_in, const SpectralMatrix& b) {
    const int n = grid_.size();
    s_.block(p_out * n, p_in * n, n, n) = b;
  }

  /// Port-level matrix at one harmonic pair.
  SpectralMatrix at_harmonics(int k_out, int k_in) const {
    SpectralMatrix m(n_ports_, n_ports_);
    for (int i = 0; i < n_ports_; ++i)
      for (int j = 0; j < n_ports_; ++j) m(i, j) = (*this)(i, k_out, j, k_in);
    return m;
  }

 private:
  int n_ports_ = 0;
  FrequencyGrid grid_;
  SpectralMatrix s_;
};

inline double to_db(cdouble s) { return 20.0 * std::log10(std::abs(s)); }
inline double to_db(double mag) { return 20.0 * std::log10(mag); }

}  // namespace fluxmod
