#include "fluxmod/tdoracle.hpp"

#include <algorithm>
#include <cmath>

namespace fluxmod {

double StateSpaceLtv::inverse_inductance(const InductiveBranch& br, double t) const {
  return br.modulated ? squid_inverse_inductance_at(br.squid, t * f_base) : br.inverse_l;
}

StateSpaceLtv build_state_space(const DeviceGraph& device, double f_base) {
  device.validate();
  StateSpaceLtv ss;
  ss.n_nodes = device.node_count();
  ss.c = Eigen::MatrixXd::Zero(ss.n_nodes, ss.n_nodes);
  ss.g = Eigen::MatrixXd::Zero(ss.n_nodes, ss.n_nodes);
  ss.f_base = f_base;
  ss.ports = device.ports();

  auto stamp = [](Eigen::MatrixXd& m, int a, int b, double v) {
    m(a, a) += v;
    if (b == kGround) return;
    m(b, b) += v;
    m(a, b) -= v;
    m(b, a) -= v;
  };

  bool any_modulated = false;
  for (const auto& e : device.elements()) {
    switch (e.kind) {
      case ElementKind::Capacitor: stamp(ss.c, e.a, e.b, e.value); break;
      case ElementKind::Resistor: stamp(ss.g, e.a, e.b, 1.0 / e.value); break;
      case ElementKind::Inductor: {
        InductiveBranch br;
        br.a = e.a, br.b = e.b, br.inverse_l = 1.0 / e.value;
        ss.branches.push_back(br);
        break;
      }
      case ElementKind::Squid: {
        InductiveBranch br;
        br.a = e.a, br.b = e.b, br.modulated = true, br.squid = e.squid;
        any_modulated = any_modulated || !e.squid.pumps.empty();
        ss.branches.push_back(br);
        break;
      }
      case ElementKind::JInverter:
        throw Error(ErrorKind::UnsupportedElement,
                    "ideal inverter '" + e.name + "' has no time-domain model; realize it capacitively first");
    }
  }
  if (any_modulated && !(f_base > 0)) throw Error(ErrorKind::NonPositiveBase, "modulated device needs f_base > 0");
  for (const auto& p : ss.ports) ss.g(p.node, p.node) += 1.0 / p.z0;

  Eigen::LLT<Eigen::MatrixXd> llt(ss.c);
  if (llt.info() != Eigen::Success)
    throw Error(ErrorKind::UnsupportedElement, "capacitance matrix is not positive definite; every node needs capacitance");
  return ss;
}

// ---- integrator -------------------------------------------------------------

LtvIntegrator::LtvIntegrator(const StateSpaceLtv& ss, const std::vector<Drive>& drives, IntegrationOptions opt)
    : ss_(ss), drives_(drives), opt_(opt), c_llt_(ss.c) {
  for (const auto& d : drives_)
    if (d.port < 0 || d.port >= int(ss_.ports.size())) throw Error(ErrorKind::InvalidArgument, "drive port out of range");
}

void LtvIntegrator::derivative(double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) const {
  const int n = ss_.n_nodes;
  const auto v = x.head(n);
  Eigen::VectorXd i = -ss_.g * v;
  for (std::size_t b = 0; b < ss_.branches.size(); ++b) {
    const auto& br = ss_.branches[b];
    const double cur = ss_.inverse_inductance(br, t) * x[n + b];
    i[br.a] -= cur;
    if (br.b != kGround) i[br.b] += cur;
  }
  for (const auto& d : drives_) {
    const auto& p = ss_.ports[d.port];
    // Thevenin emf 2 sqrt(z0) a cos(wt) behind z0, as a Norton current
    i[p.node] += 2.0 * d.amplitude / std::sqrt(p.z0) * std::cos(kTwoPi * d.frequency * t);
  }
  dx.resize(x.size());
  dx.head(n) = c_llt_.solve(i);
  for (std::size_t b = 0; b < ss_.branches.size(); ++b) {
    const auto& br = ss_.branches[b];
    dx[n + b] = v[br.a] - (br.b == kGround ? 0.0 : v[br.b]);
  }
}

void LtvIntegrator::advance(Eigen::VectorXd& x, double& t, double t_end) const {
  // Dormand-Prince 5(4)
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  const int n = ss_.n_nodes;
  Eigen::VectorXd scale(x.size());
  double vref = 0.0, fref = 0.0;
  for (const auto& d : drives_) {
    vref = std::max(vref, 2.0 * d.amplitude * std::sqrt(ss_.ports[d.port].z0));
    fref = std::max(fref, d.frequency);
  }
  if (vref == 0.0) vref = std::max(1.0, x.head(n).cwiseAbs().maxCoeff());
  if (fref == 0.0) fref = ss_.f_base > 0 ? ss_.f_base : 1e9;
  scale.head(n).setConstant(vref);
  scale.tail(x.size() - n).setConstant(vref / (kTwoPi * fref));

  if (h_ <= 0.0) h_ = 1e-3 / fref;
  Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, y;
  derivative(t, x, k1);
  while (t < t_end) {
    const bool last = t + h_ >= t_end;
    const double h = last ? t_end - t : h_;
    derivative(t + c2 * h, x + h * a21 * k1, k2);
    derivative(t + c3 * h, x + h * (a31 * k1 + a32 * k2), k3);
    derivative(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3), k4);
    derivative(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5);
    derivative(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
    y = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    derivative(t + h, y, k7);
    const Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double en = 0.0;
    for (int i = 0; i < x.size(); ++i) {
      const double sc = opt_.atol * scale[i] + opt_.rtol * std::max(std::abs(x[i]), std::abs(y[i]));
      en = std::max(en, std::abs(err[i]) / sc);
    }
    if (!std::isfinite(en)) throw Error(ErrorKind::NoSteadyState, "integration diverged");
    if (en <= 1.0) {
      t = last ? t_end : t + h;
      x = y;
      k1 = k7;  // first-same-as-last
    }
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    if (!last || en > 1.0) h_ = h * fac;
    if (h_ < 1e-22) throw Error(ErrorKind::NoSteadyState, "step size underflow");
  }
}

double floquet_spectral_radius(const StateSpaceLtv& ss, const IntegrationOptions& opt) {
  if (!(ss.f_base > 0)) throw Error(ErrorKind::NonPositiveBase, "stability needs a pump period");
  const int d = ss.dim();
  LtvIntegrator integ(ss, {}, opt);
  Eigen::MatrixXd mono(d, d);
  const double period = 1.0 / ss.f_base;
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    x[i] = 1.0;
    double t = 0.0;
    integ.advance(x, t, period);
    mono.col(i) = x;
  }
  // flux states carry a different unit; a similarity scaling leaves eigenvalues alone
  return mono.eigenvalues().cwiseAbs().maxCoeff();
}

// ---- projection -------------------------------------------------------------

double common_period(double f_signal, double f_base, int max_ratio) {
  const double r = std::abs(f_signal) / f_base;
  for (int q = 1; q <= max_ratio; ++q) {
    const double m = r * q;
    if (std::abs(m - std::round(m)) < 1e-9 * std::max(1.0, m)) return q / f_base;
  }
  return 0.0;
}

namespace {

struct Projector {
  Eigen::MatrixXd pinv;  // 2N x M
  std::vector<double> f;
};

Projector make_projector(const std::vector<double>& tau, const FrequencyGrid& grid) {
  const int m = int(tau.size()), n = grid.size();
  Eigen::MatrixXd a(m, 2 * n);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < n; ++k) {
      const double ph = kTwoPi * grid.frequencies()[k] * tau[i];
      a(i, 2 * k) = std::cos(ph);
      a(i, 2 * k + 1) = -std::sin(ph);
    }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(sv.size() - 1) * 1e8 > sv(0)))
    throw Error(ErrorKind::IllConditionedProjection, "grid frequencies are not resolvable over the window");
  Projector p;
  p.pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  p.f = grid.frequencies();
  return p;
}

SpectralVector apply(const Projector& p, const Eigen::VectorXd& w, double t0) {
  const Eigen::VectorXd c = p.pinv * w;
  const int n = int(p.f.size());
  SpectralVector out(n);
  for (int k = 0; k < n; ++k)
    out[k] = cdouble(c[2 * k], c[2 * k + 1]) * std::polar(1.0, -kTwoPi * p.f[k] * t0);
  return out;
}

}  // namespace

SpectralVector extract_harmonics(const std::vector<double>& t, const Eigen::VectorXd& w, const FrequencyGrid& grid) {
  if (t.size() != std::size_t(w.size()) || t.empty()) throw Error(ErrorKind::InvalidArgument, "sample count mismatch");
  const double t0 = t.front();
  std::vector<double> tau(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) tau[i] = t[i] - t0;
  return apply(make_projector(tau, grid), w, t0);
}

Waveforms integrate_to_steady_state(const StateSpaceLtv& ss, const Drive& drive, const FrequencyGrid& grid,
                                    const IntegrationOptions& opt) {
  const double fb = grid.f_base();
  double window = opt.window;
  if (window <= 0.0) {
    window = common_period(drive.frequency, fb);
    if (window <= 0.0) window = 4.0 / fb;
  }
  double fmax = 0.0;
  for (double f : grid.frequencies()) fmax = std::max(fmax, std::abs(f));
  const int m = opt.samples_per_window > 0 ? opt.samples_per_window
                                           : std::max(64, int(std::ceil(8.0 * fmax * window)));
  std::vector<double> tau(m);
  for (int i = 0; i < m; ++i) tau[i] = window * i / m;
  const Projector proj = make_projector(tau, grid);

  LtvIntegrator integ(ss, {drive}, opt);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(ss.dim());
  double t = 0.0;
  const double t_cap = opt.max_periods / fb;

  Waveforms out;
  out.window = window;
  std::vector<SpectralVector> prev;
  Eigen::MatrixXd samples(m, ss.n_nodes);
  while (true) {
    const double t0 = t;
    for (int i = 0; i < m; ++i) {
      integ.advance(x, t, t0 + tau[i]);
      samples.row(i) = x.head(ss.n_nodes).transpose();
    }
    integ.advance(x, t, t0 + window);
    ++out.windows;

    std::vector<SpectralVector> cur;
    double ref = 0.0, change = 0.0;
    for (std::size_t p = 0; p < ss.ports.size(); ++p) {
      cur.push_back(apply(proj, samples.col(ss.ports[p].node), t0));
      ref = std::max(ref, cur.back().cwiseAbs().maxCoeff());
      if (!prev.empty()) change = std::max(change, (cur.back() - prev[p]).cwiseAbs().maxCoeff());
    }
    if (!prev.empty() && change <= opt.tolerance * ref) {
      out.t.resize(m);
      for (int i = 0; i < m; ++i) out.t[i] = t0 + tau[i];
      out.v = samples;
      out.elapsed = t;
      out.pump_periods = t * fb;
      return out;
    }
    prev = std::move(cur);
    if (t >= t_cap)
      throw Error(ErrorKind::NoSteadyState, "no steady state within " + std::to_string(opt.max_periods) + " pump periods");
  }
}

// ---- comparison -------------------------------------------------------------

OracleReport oracle_compare(const Device& device, double f_signal, int k_max, const OracleOptions& opt) {
  OracleReport rep;
  DeviceGraph net = device.graph;
  rep.realization = "as-given";
  if (opt.pi_realize && device.series) {
    net = device.series->pi_realized(device.f_design > 0 ? device.f_design : device.f_center);
    rep.realization = "pi-capacitive";
  }
  const FrequencyGrid grid = build_grid(f_signal, device.f_base, k_max);
  StampOptions so;
  so.mode = CoefficientMode::Exact;
  const FloquetSMatrix s = solve_floquet_s(net, grid, so);
  StateSpaceLtv ss = build_state_space(net, device.f_base);
  ss.realization = rep.realization;

  std::vector<int> inputs = opt.input_ports;
  if (inputs.empty())
    for (int p = 0; p < int(net.ports().size()); ++p) inputs.push_back(p);

  rep.pass = true;
  for (int pin : inputs) {
    const Waveforms w = integrate_to_steady_state(ss, {pin, f_signal, 1.0}, grid, opt.integration);
    for (int pout = 0; pout < int(net.ports().size()); ++pout) {
      const double z0 = net.ports()[pout].z0;
      const SpectralVector v = extract_harmonics(w.t, w.v.col(net.ports()[pout].node), grid);
      for (int k = -k_max; k <= k_max; ++k) {
        cdouble b = v[grid.index(k)] / std::sqrt(z0);
        if (pout == pin && k == 0) b -= 1.0;
        OracleRow r;
        r.port_in = pin, r.port_out = pout, r.k = k;
        r.spectral_db = to_db(s(pout, k, pin, 0));
        r.oracle_db = to_db(b);
        r.compared = r.spectral_db > opt.floor_db;
        if (r.compared) {
          const double err = std::abs(r.spectral_db - r.oracle_db);
          rep.max_error_db = std::max(rep.max_error_db, err);
          if (!(err <= opt.tolerance_db)) rep.pass = false;
        }
        rep.rows.push_back(r);
      }
    }
  }
  return rep;
}

}  // namespace fluxmod
