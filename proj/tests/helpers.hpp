#pragma once

#include <random>

#include <doctest.h>

#include "fluxmod/devices.hpp"
#include "fluxmod/floquet.hpp"

namespace fluxtest {

using namespace fluxmod;

inline double max_abs_diff(const SpectralMatrix& a, const SpectralMatrix& b) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  return (a - b).cwiseAbs().maxCoeff();
}

inline double rel_diff(const SpectralMatrix& a, const SpectralMatrix& b) {
  const double scale = std::max(1e-300, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  return max_abs_diff(a, b) / scale;
}

inline SquidSpec squid(double dc, int stack = 10, double amp = 0.0, double phase = 0.0, int harm = 1) {
  SquidSpec s;
  s.i_c = 4e-6;
  s.n_stack = stack;
  s.phi_dc = dc;
  if (amp > 0) s.pumps.push_back({amp, harm, phase});
  return s;
}

/// Random series chain J0 R1 J1 ... Rn Jn around 6 GHz; modulated when amp > 0.
inline SeriesNetwork random_chain(std::mt19937_64& rng, int order, double amp, bool equal_phase = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SeriesNetwork net;
  for (int i = 0; i < order; ++i) {
    net.stages.push_back(SeriesStage::inverter(0.004 + 0.02 * u(rng), u(rng) < 0.5 ? 1 : -1));
    const double phase = equal_phase ? 0.7 : 2 * kPi * u(rng);
    net.stages.push_back(
        SeriesStage::resonator(300e-15 + 600e-15 * u(rng), squid(0.30 + 0.08 * u(rng), 10, amp * u(rng), phase)));
  }
  net.stages.push_back(SeriesStage::inverter(0.004 + 0.02 * u(rng)));
  return net;
}

}  // namespace fluxtest
