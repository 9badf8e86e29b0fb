#include "fluxmod/twoport.hpp"

#include <algorithm>

namespace fluxmod {

namespace {

SpectralMatrix stack(const SpectralAbcd& m) {
  const int n = m.dim();
  SpectralMatrix full(2 * n, 2 * n);
  full << m.a, m.b, m.c, m.d;
  return full;
}

}  // namespace

SpectralAbcd shunt_abcd(const SpectralMatrix& y) {
  const int n = int(y.rows());
  return {SpectralMatrix::Identity(n, n), SpectralMatrix::Zero(n, n), y, SpectralMatrix::Identity(n, n)};
}

SpectralAbcd series_abcd(const SpectralMatrix& z) {
  const int n = int(z.rows());
  return {SpectralMatrix::Identity(n, n), z, SpectralMatrix::Zero(n, n), SpectralMatrix::Identity(n, n)};
}

SpectralAbcd jinverter_abcd(double j, const FrequencyGrid& grid, int sign) {
  if (!(j > 0)) throw Error(ErrorKind::NonPositiveJ, "inverter J must be > 0");
  if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidArgument, "inverter sign must be +1 or -1");
  const SpectralMatrix u = identity_block(grid);
  const double s = sign;
  return {zero_block(grid), u * cdouble(0, s / j), u * cdouble(0, s * j), zero_block(grid)};
}

namespace {

bool is_shunt(const SpectralAbcd& m) { return m.b.isZero(0.0) && m.a.isIdentity(0.0) && m.d.isIdentity(0.0); }
bool is_crossed(const SpectralAbcd& m) { return m.a.isZero(0.0) && m.d.isZero(0.0); }

}  // namespace

SpectralAbcd reverse(const SpectralAbcd& m) {
  const int n = m.dim();
  if (is_shunt(m)) return m;
  if (is_crossed(m)) {
    const SpectralMatrix u = SpectralMatrix::Identity(n, n);
    return {m.a, -block_solve(m.c, u), -block_solve(m.b, u), m.d};
  }
  const SpectralMatrix inv = block_solve(stack(m), SpectralMatrix::Identity(2 * n, 2 * n));
  return {inv.topLeftCorner(n, n), -inv.topRightCorner(n, n), -inv.bottomLeftCorner(n, n),
          inv.bottomRightCorner(n, n)};
}

SpectralAbcd cascade(const TwoPortChain& chain) {
  if (chain.stages.empty()) throw Error(ErrorKind::InvalidArgument, "empty chain");
  const int n = chain.grid.size();
  for (const auto& st : chain.stages)
    if (st.dim() != n || st.b.rows() != n || st.c.rows() != n || st.d.rows() != n)
      throw Error(ErrorKind::GridMismatch, "stage dimension does not match the chain grid");
  SpectralAbcd acc = chain.stages.front();
  for (std::size_t i = 1; i < chain.stages.size(); ++i) {
    const SpectralAbcd& st = chain.stages[i];
    if (is_shunt(st)) {
      // [A B; C D] [U 0; Y U] = [A + B Y, B; C + D Y, D]
      acc.a.noalias() += acc.b * st.c;
      acc.c.noalias() += acc.d * st.c;
    } else if (is_crossed(st) && st.b.isDiagonal(0.0) && st.c.isDiagonal(0.0)) {
      // [A B; C D] [0 Bs; Cs 0] = [B Cs, A Bs; D Cs, C Bs]
      const auto bs = st.b.diagonal().asDiagonal();
      const auto cs = st.c.diagonal().asDiagonal();
      SpectralMatrix na = acc.b * cs, nb = acc.a * bs, nc = acc.d * cs, nd = acc.c * bs;
      acc = {std::move(na), std::move(nb), std::move(nc), std::move(nd)};
    } else {
      acc = acc * st;
    }
  }
  return acc;
}

TwoPortChain reversed(const TwoPortChain& chain) {
  TwoPortChain out{chain.grid, {}, chain.z0};
  out.stages.reserve(chain.stages.size());
  for (auto it = chain.stages.rbegin(); it != chain.stages.rend(); ++it) out.stages.push_back(reverse(*it));
  return out;
}

SpectralMatrix s21_block(const SpectralAbcd& m, double z0) {
  const int n = m.dim();
  const SpectralMatrix sigma = m.a + m.b / z0 + m.c * z0 + m.d;
  return 2.0 * block_solve(sigma, SpectralMatrix::Identity(n, n));
}

SpectralMatrix s11_block(const SpectralAbcd& m, double z0) {
  const SpectralMatrix sigma = m.a + m.b / z0 + m.c * z0 + m.d;
  const SpectralMatrix delta = m.a + m.b / z0 - m.c * z0 - m.d;
  // X = delta * sigma^-1  <=>  sigma^T X^T = delta^T
  return block_solve(sigma.transpose(), delta.transpose()).transpose();
}

FloquetSMatrix abcd_to_s(const SpectralAbcd& m, const FrequencyGrid& grid, double z0) {
  const int n = grid.size();
  if (m.dim() != n) throw Error(ErrorKind::GridMismatch, "ABCD dimension does not match grid");
  if (!(z0 > 0)) throw Error(ErrorKind::InvalidArgument, "z0 must be > 0");
  const SpectralMatrix u = SpectralMatrix::Identity(n, n);
  const SpectralMatrix p = m.a + m.b / z0, q = m.a - m.b / z0;
  const SpectralMatrix r = z0 * m.c + m.d, t = z0 * m.c - m.d;

  // unknowns [b1; b2], excitation [a1; a2]
  SpectralMatrix lhs(2 * n, 2 * n), rhs(2 * n, 2 * n);
  lhs << u, -p, -u, -r;
  rhs << -u, q, -u, t;
  const SpectralMatrix s = block_solve(lhs, rhs);

  FloquetSMatrix out(2, grid);
  out.matrix() = s;
  return out;
}

FloquetSMatrix chain_s(const TwoPortChain& chain) {
  const SpectralAbcd fwd = cascade(chain);
  const SpectralAbcd rev = cascade(reversed(chain));
  FloquetSMatrix out(2, chain.grid);
  out.set_block(0, 0, s11_block(fwd, chain.z0));
  out.set_block(1, 0, s21_block(fwd, chain.z0));
  out.set_block(0, 1, s21_block(rev, chain.z0));
  out.set_block(1, 1, s11_block(rev, chain.z0));
  return out;
}

}  // namespace fluxmod
