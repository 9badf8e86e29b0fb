#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "fluxmod/error.hpp"

namespace fluxmod {

template <class Scalar>
using Complex = std::complex<Scalar>;

template <class Scalar>
using SpectralMatrixT = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using SpectralVectorT = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

using cdouble = std::complex<double>;
using SpectralMatrix = SpectralMatrixT<double>;
using SpectralVector = SpectralVectorT<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Signed ladder f_k = f_signal + k*f_base, k = -K..K.  Rows and columns of every
/// spectral block are addressed by k through index(), never by raw offset.
template <class Scalar>
class BasicFrequencyGrid {
 public:
  BasicFrequencyGrid() = default;

  Scalar f_signal() const { return f_signal_; }
  Scalar f_base() const { return f_base_; }
  int k_max() const { return k_max_; }
  int size() const { return 2 * k_max_ + 1; }
  const std::vector<Scalar>& frequencies() const { return freqs_; }

  Scalar frequency(int k) const { return freqs_[index(k)]; }
  int index(int k) const { return k + k_max_; }
  int harmonic(int idx) const { return idx - k_max_; }
  bool contains(int k) const { return k >= -k_max_ && k <= k_max_; }

  bool same_as(const BasicFrequencyGrid& o) const {
    return k_max_ == o.k_max_ && f_signal_ == o.f_signal_ && f_base_ == o.f_base_;
  }

  static BasicFrequencyGrid build(Scalar f_signal, Scalar f_base, int k_max, Scalar eps_f = Scalar(1)) {
    if (!(f_base > 0)) throw Error(ErrorKind::NonPositiveBase, "f_base must be > 0");
    if (k_max < 0) throw Error(ErrorKind::InvalidArgument, "k_max must be >= 0");
    BasicFrequencyGrid g;
    g.f_signal_ = f_signal;
    g.f_base_ = f_base;
    g.k_max_ = k_max;
    g.freqs_.resize(2 * k_max + 1);
    for (int k = -k_max; k <= k_max; ++k) {
      Scalar f = f_signal + Scalar(k) * f_base;
      if (std::abs(f) < eps_f)
        throw Error(ErrorKind::ZeroFrequencyOnGrid,
                    "harmonic k=" + std::to_string(k) + " lands on DC (f=" + std::to_string(double(f)) + " Hz)");
      g.freqs_[k + k_max] = f;
    }
    return g;
  }

 private:
  Scalar f_signal_ = 0, f_base_ = 1;
  int k_max_ = 0;
  std::vector<Scalar> freqs_;
};

using FrequencyGrid = BasicFrequencyGrid<double>;

inline FrequencyGrid build_grid(double f_signal, double f_base, int k_max, double eps_f = 1.0) {
  return FrequencyGrid::build(f_signal, f_base, k_max, eps_f);
}

/// diag(1/(j*2*pi*f_k)); the integration operator acting on harmonic phasors.
template <class Scalar>
SpectralMatrixT<Scalar> omega_matrix(const BasicFrequencyGrid<Scalar>& g) {
  const int n = g.size();
  SpectralMatrixT<Scalar> m = SpectralMatrixT<Scalar>::Zero(n, n);
  for (int i = 0; i < n; ++i)
    m(i, i) = Scalar(1) / Complex<Scalar>(0, Scalar(kTwoPi) * g.frequencies()[i]);
  return m;
}

template <class Scalar>
SpectralMatrixT<Scalar> identity_block(const BasicFrequencyGrid<Scalar>& g) {
  return SpectralMatrixT<Scalar>::Identity(g.size(), g.size());
}

template <class Scalar>
SpectralMatrixT<Scalar> zero_block(const BasicFrequencyGrid<Scalar>& g) {
  return SpectralMatrixT<Scalar>::Zero(g.size(), g.size());
}

/// Element (k_out, k_in) of a spectral block, by harmonic index.
template <class Derived, class Scalar>
auto& at(Eigen::MatrixBase<Derived>& m, const BasicFrequencyGrid<Scalar>& g, int k_out, int k_in) {
  return m(g.index(k_out), g.index(k_in));
}
template <class Derived, class Scalar>
auto at(const Eigen::MatrixBase<Derived>& m, const BasicFrequencyGrid<Scalar>& g, int k_out, int k_in) {
  return m(g.index(k_out), g.index(k_in));
}

inline constexpr double kMaxCondition = 1e12;

/// LU solve with a reciprocal-condition guard.  rhs may be a vector or a block.  Rows and
/// columns are equilibrated first so that harmonics with very different admittance levels
/// do not masquerade as ill-conditioning.
template <class DerivedA, class DerivedB>
auto block_solve(const Eigen::MatrixBase<DerivedA>& m, const Eigen::MatrixBase<DerivedB>& rhs)
    -> Eigen::Matrix<typename DerivedB::Scalar, Eigen::Dynamic, DerivedB::ColsAtCompileTime> {
  using Result = Eigen::Matrix<typename DerivedB::Scalar, Eigen::Dynamic, DerivedB::ColsAtCompileTime>;
  using Mat = Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Real = typename Eigen::NumTraits<typename DerivedA::Scalar>::Real;
  if (m.rows() != m.cols() || m.rows() != rhs.rows())
    throw Error(ErrorKind::InvalidArgument, "block_solve shape mismatch");
  if (!m.allFinite()) throw Error(ErrorKind::SingularSystem, "non-finite system matrix");

  const Eigen::Index n = m.rows();
  Eigen::Matrix<Real, Eigen::Dynamic, 1> r(n), c(n);
  Mat scaled = m;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Real mx = scaled.row(i).cwiseAbs().maxCoeff();
    if (!(mx > 0)) throw Error(ErrorKind::SingularSystem, "zero row in system matrix");
    r[i] = Real(1) / mx;
  }
  scaled = r.asDiagonal() * scaled;
  for (Eigen::Index j = 0; j < n; ++j) c[j] = Real(1) / scaled.col(j).cwiseAbs().maxCoeff();
  scaled = scaled * c.asDiagonal();

  Eigen::PartialPivLU<Mat> lu(scaled);
  const double rc = double(lu.rcond());
  if (!(rc * kMaxCondition > 1.0))
    throw Error(ErrorKind::SingularSystem, "condition estimate " + std::to_string(1.0 / rc) + " exceeds 1e12");
  Result x = c.asDiagonal() * lu.solve(r.asDiagonal() * rhs);
  if (!x.allFinite()) throw Error(ErrorKind::SingularSystem, "non-finite solution");
  return x;
}

/// Block ABCD over harmonics.
template <class Scalar>
struct BasicSpectralAbcd {
  SpectralMatrixT<Scalar> a, b, c, d;

  int dim() const { return int(a.rows()); }

  static BasicSpectralAbcd identity(int n) {
    using M = SpectralMatrixT<Scalar>;
    return {M::Identity(n, n), M::Zero(n, n), M::Zero(n, n), M::Identity(n, n)};
  }

  friend BasicSpectralAbcd operator*(const BasicSpectralAbcd& l, const BasicSpectralAbcd& r) {
    return {l.a * r.a + l.b * r.c, l.a * r.b + l.b * r.d, l.c * r.a + l.d * r.c, l.c * r.b + l.d * r.d};
  }
};

using SpectralAbcd = BasicSpectralAbcd<double>;

}  // namespace fluxmod
