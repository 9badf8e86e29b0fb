#pragma once

#include <vector>

#include "fluxmod/floquet.hpp"
#include "fluxmod/spectral.hpp"

namespace fluxmod {

struct TwoPortChain {
  FrequencyGrid grid;
  std::vector<SpectralAbcd> stages;
  double z0 = 50.0;
};

SpectralAbcd shunt_abcd(const SpectralMatrix& y);

/// Series element with impedance block z (A=D=U, B=z, C=0).
SpectralAbcd series_abcd(const SpectralMatrix& z);

/// Ideal lossless reciprocal admittance inverter: A=D=0, B=sign*j/J, C=sign*j*J.
SpectralAbcd jinverter_abcd(double j, const FrequencyGrid& grid, int sign = 1);

/// The same network seen from the other side (ports swapped).
SpectralAbcd reverse(const SpectralAbcd& m);

/// Left-to-right product of all stages.
SpectralAbcd cascade(const TwoPortChain& chain);

/// Stage list reversed and each stage flipped end for end.
TwoPortChain reversed(const TwoPortChain& chain);

/// Full 2-port Floquet S from a block ABCD by solving the wave equations directly.
FloquetSMatrix abcd_to_s(const SpectralAbcd& m, const FrequencyGrid& grid, double z0);

/// S21 = 2 (A + B/z0 + C z0 + D)^-1.
SpectralMatrix s21_block(const SpectralAbcd& m, double z0);

/// S11 = (A + B/z0 - C z0 - D)(A + B/z0 + C z0 + D)^-1.
SpectralMatrix s11_block(const SpectralAbcd& m, double z0);

/// Chain analysis: S21/S11 from the forward cascade, S12/S22 from the reversed one.
FloquetSMatrix chain_s(const TwoPortChain& chain);

}  // namespace fluxmod
