#include "fluxmod/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fluxmod/tdoracle.hpp"


namespace fluxmod {

double metric_value(const Metrics& m, const std::string& name) {
  if (name == "IL_fwd") return m.il_fwd;
  if (name == "ISO_rev") return m.iso_rev;
  if (name == "RL") return m.rl;
  if (name == "gain") return m.gain;
  if (name == "directionality") return m.directionality;
  throw Error(ErrorKind::InvalidArgument, "unknown metric '" + name + "'");
}

FloquetSMatrix device_s(const Device& d, const FrequencyGrid& grid, CoefficientMode mode) {
  if (d.series) return chain_s(d.series->chain(grid, mode));
  StampOptions so;
  so.mode = mode;
  return solve_floquet_s(d.graph, grid, so);
}

Metrics evaluate_device(const Device& d, double frequency, int k, const AnalysisSpec& a) {
  const int kk = k > 0 ? k : d.k_default;
  const FloquetSMatrix s = device_s(d, build_grid(frequency, d.f_base, kk), a.mode);
  const int np = s.n_ports();
  if (a.port_in < 0 || a.port_in >= np || a.port_out < 0 || a.port_out >= np || a.port_in == a.port_out)
    throw Error(ErrorKind::InvalidArgument, "port pair out of range");
  const double fwd = to_db(s(a.port_out, 0, a.port_in, 0));
  const double rev = to_db(s(a.port_in, 0, a.port_out, 0));
  const double ret = to_db(s(a.port_in, 0, a.port_in, 0));
  Metrics m;
  m.il_fwd = -fwd;
  m.iso_rev = -rev;
  m.rl = -ret;
  m.gain = fwd;
  m.directionality = fwd - rev;
  return m;
}

namespace {

// Split "f" off the template parameters.
std::pair<ParamMap, std::optional<double>> split_frequency(const ParamMap& params) {
  ParamMap rest = params;
  std::optional<double> f;
  if (auto it = rest.find("f"); it != rest.end()) {
    f = it->second;
    rest.erase(it);
  }
  return {rest, f};
}

double analysis_frequency(const Device& d, const AnalysisSpec& a, std::optional<double> f) {
  if (f) return *f;
  if (a.frequency > 0) return a.frequency;
  return d.f_center + a.offset;
}

}  // namespace

Metrics evaluate_template(const std::string& name, const ParamMap& params, const AnalysisSpec& a, int k) {
  auto [rest, f] = split_frequency(params);
  const Device d = make_template(name, rest);
  return evaluate_device(d, analysis_frequency(d, a, f), k, a);
}

std::vector<double> Axis::values() const {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "axis '" + name + "' needs at least one point");
  if (count == 1) return {min};
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = min + (max - min) * i / (count - 1);
  return v;
}

namespace {

double max_metric_change(const Metrics& x, const Metrics& y, const std::vector<std::string>& names) {
  double d = 0.0;
  for (const auto& n : names) {
    const double a = metric_value(x, n), b = metric_value(y, n);
    if (std::isfinite(a) && std::isfinite(b)) d = std::max(d, std::abs(a - b));
  }
  return d;
}

struct KGate {
  int k = 0;
  bool converged = true;
};

// Raise K by 2 until the listed metrics move by at most `tol` dB, checked on the probe points.
KGate gate_k(const std::string& tmpl, const std::vector<ParamMap>& probes, const AnalysisSpec& a,
             const std::vector<std::string>& names, double tol, int k_limit) {
  int k0 = a.k;
  if (k0 <= 0) {
    auto [rest, f] = split_frequency(probes.front());
    k0 = make_template(tmpl, rest).k_default;
  }
  const int limit = k_limit > 0 ? k_limit : 4 * k0;
  for (int k = k0; k + 2 <= limit; k += 2) {
    bool ok = true, any = false;
    for (const auto& p : probes) {
      try {
        const Metrics m1 = evaluate_template(tmpl, p, a, k);
        const Metrics m2 = evaluate_template(tmpl, p, a, k + 2);
        any = true;
        if (max_metric_change(m1, m2, names) > tol) ok = false;
      } catch (const Error&) {
      }
      if (!ok) break;
    }
    if (!any) return {k0, true};
    if (ok) return {k, true};
  }
  return {limit, false};
}

}  // namespace

SweepTable run_sweep(const SweepSpec& s) {
  if (s.axes.empty() || s.axes.size() > 2) throw Error(ErrorKind::InvalidArgument, "a sweep takes one or two axes");
  if (!is_template(s.template_name)) throw Error(ErrorKind::InvalidArgument, "unknown template '" + s.template_name + "'");
  for (const auto& m : s.metrics) metric_value(Metrics{}, m);

  const std::vector<double> v0 = s.axes[0].values();
  const std::vector<double> v1 = s.axes.size() > 1 ? s.axes[1].values() : std::vector<double>{0.0};
  std::vector<ParamMap> points;
  for (double x : v0)
    for (double y : v1) {
      ParamMap p = s.fixed;
      p[s.axes[0].name] = x;
      if (s.axes.size() > 1) p[s.axes[1].name] = y;
      points.push_back(std::move(p));
    }
  // fail fast on misspelt parameter names
  {
    auto [rest, f] = split_frequency(points.front());
    (void)f;
    const ParamMap defaults = template_defaults(s.template_name);
    for (const auto& [key, val] : rest)
      if (!defaults.count(key))
        throw Error(ErrorKind::InvalidArgument, "template " + s.template_name + " has no parameter '" + key + "'");
  }

  SweepTable t;
  for (const auto& ax : s.axes) t.columns.push_back(ax.name);
  t.n_axes = int(s.axes.size());
  for (const auto& m : s.metrics) t.columns.push_back(m);

  KGate kg{s.analysis.k, true};
  if (s.k_gate) {
    std::vector<ParamMap> probes{points.front()};
    if (points.size() > 1) probes.push_back(points.back());
    kg = gate_k(s.template_name, probes, s.analysis, s.metrics, s.k_gate_db, s.k_limit);
  }
  t.k_used = kg.k;
  t.k_converged = kg.converged;

  t.rows.assign(points.size(), {});
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      std::vector<std::optional<double>> row;
      row.push_back(v0[i / v1.size()]);
      if (s.axes.size() > 1) row.push_back(v1[i % v1.size()]);
      try {
        const Metrics m = evaluate_template(s.template_name, points[i], s.analysis, kg.k);
        for (const auto& n : s.metrics) {
          const double v = metric_value(m, n);
          row.push_back(std::isfinite(v) ? std::optional<double>(v) : std::nullopt);
        }
      } catch (const Error&) {
        row.resize(row.size() + s.metrics.size());
      }
      t.rows[i] = std::move(row);
    }
  };
  const int jobs = std::max(1, std::min<int>(s.jobs, int(points.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return t;
}

std::string format_number(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
    if (s[0] == '-') s.erase(0, 1);
  }
  return s;
}

namespace {

std::string format_axis(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

std::string to_csv(const SweepTable& t) {
  std::ostringstream os;
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) os << ",";
      if (r[c]) os << (int(c) < t.n_axes ? format_axis(*r[c]) : format_number(*r[c], 4));
    }
    os << "\n";
  }
  return os.str();
}

std::string to_json(const SweepTable& t) {
  using nlohmann::ordered_json;
  ordered_json rows = ordered_json::array();
  for (const auto& r : t.rows) {
    ordered_json o = ordered_json::object();
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (!r[c]) {
        o[t.columns[c]] = nullptr;
      } else if (int(c) < t.n_axes) {
        o[t.columns[c]] = *r[c];
      } else {
        // same rounding as the CSV cells
        o[t.columns[c]] = std::stod(format_number(*r[c], 4));
      }
    }
    rows.push_back(std::move(o));
  }
  ordered_json out = ordered_json::object();
  out["columns"] = t.columns;
  out["rows"] = std::move(rows);
  out["k"] = t.k_used;
  out["k_converged"] = t.k_converged;
  return out.dump(2) + "\n";
}

NelderMeadResult nelder_mead_box(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x0, const std::vector<double>& lo, const std::vector<double>& hi,
                                 int max_evals, double xtol) {
  const std::size_t n = x0.size();
  if (lo.size() != n || hi.size() != n) throw Error(ErrorKind::InvalidArgument, "bound dimension mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!(hi[i] >= lo[i])) throw Error(ErrorKind::InvalidArgument, "empty bound interval");

  // work on the unit box
  auto to_x = [&](const std::vector<double>& u) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = lo[i] + std::clamp(u[i], 0.0, 1.0) * (hi[i] - lo[i]);
    return x;
  };
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& u) {
    ++res.evaluations;
    const double v = f(to_x(u));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> s(n + 1, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) s[0][i] = hi[i] > lo[i] ? (x0[i] - lo[i]) / (hi[i] - lo[i]) : 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    s[j] = s[0];
    const double step = 0.15;
    s[j][j - 1] += s[0][j - 1] + step <= 1.0 ? step : -step;
  }
  std::vector<double> fv(n + 1);
  for (std::size_t j = 0; j <= n; ++j) fv[j] = eval(s[j]);

  auto clamp_u = [](std::vector<double> u) {
    for (double& v : u) v = std::clamp(v, 0.0, 1.0);
    return u;
  };
  auto combine = [&](const std::vector<double>& c, const std::vector<double>& w, double t) {
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = c[i] + t * (w[i] - c[i]);
    return clamp_u(u);
  };

  while (res.evaluations < max_evals) {
    std::vector<std::size_t> ord(n + 1);
    for (std::size_t j = 0; j <= n; ++j) ord[j] = j;
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> f2;
    for (auto j : ord) s2.push_back(s[j]), f2.push_back(fv[j]);
    s = std::move(s2), fv = std::move(f2);

    double diam = 0.0;
    for (std::size_t j = 1; j <= n; ++j)
      for (std::size_t i = 0; i < n; ++i) diam = std::max(diam, std::abs(s[j][i] - s[0][i]));
    if (diam < xtol) break;
    if (std::isfinite(fv[n]) && std::abs(fv[n] - fv[0]) < 1e-10 && diam < 1e-3) break;

    std::vector<double> c(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) c[i] += s[j][i] / double(n);

    const auto xr = combine(c, s[n], -1.0);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      const auto xe = combine(c, s[n], -2.0);
      const double fe = eval(xe);
      if (fe < fr) s[n] = xe, fv[n] = fe;
      else s[n] = xr, fv[n] = fr;
    } else if (fr < fv[n - 1]) {
      s[n] = xr, fv[n] = fr;
    } else {
      const bool outside = fr < fv[n];
      const auto xc = combine(c, outside ? xr : s[n], 0.5);
      const double fc = eval(xc);
      if (fc < std::min(fr, fv[n])) {
        s[n] = xc, fv[n] = fc;
      } else {
        for (std::size_t j = 1; j <= n; ++j) {
          s[j] = combine(s[0], s[j], 0.5);
          fv[j] = eval(s[j]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t j = 1; j <= n; ++j)
    if (fv[j] < fv[best]) best = j;
  res.x = to_x(s[best]);
  res.f = fv[best];
  return res;
}

namespace {

bool small_signal_unstable(const Device& d) {
  if (!d.series)
    throw Error(ErrorKind::UnsupportedElement, "stability screening needs a series-coupled device");
  const StateSpaceLtv ss = build_state_space(d.series->pi_realized(d.f_design), d.f_base);
  return !(floquet_spectral_radius(ss) < 1.0);
}

struct Scored {
  double objective = std::numeric_limits<double>::infinity();
  Metrics metrics;
};

// Lower objective wins; near-ties go to lower IL, then lower modulation amplitude.
bool better(const Scored& a, const ParamMap& pa, const Scored& b, const ParamMap& pb) {
  if (!std::isfinite(b.objective)) return std::isfinite(a.objective);
  if (!std::isfinite(a.objective)) return false;
  const double tol = 1e-9 * std::max(1.0, std::abs(b.objective));
  if (a.objective < b.objective - tol) return true;
  if (a.objective > b.objective + tol) return false;
  if (a.metrics.il_fwd != b.metrics.il_fwd) return a.metrics.il_fwd < b.metrics.il_fwd;
  auto amp = [](const ParamMap& p) {
    auto it = p.find("amp");
    return it == p.end() ? 0.0 : it->second;
  };
  return amp(pa) < amp(pb);
}

}  // namespace

OptimizeResult optimize(const OptimizeSpec& s) {
  const auto& bounds = s.objective.bounds;
  if (bounds.empty()) throw Error(ErrorKind::InvalidArgument, "optimize needs at least one bounded parameter");
  if (!is_template(s.template_name)) throw Error(ErrorKind::InvalidArgument, "unknown template '" + s.template_name + "'");
  const ParamMap defaults = template_defaults(s.template_name);
  for (const auto& b : bounds) {
    if (b.name != "f" && !defaults.count(b.name))
      throw Error(ErrorKind::InvalidArgument, "template " + s.template_name + " has no parameter '" + b.name + "'");
    if (!(b.hi >= b.lo)) throw Error(ErrorKind::InvalidArgument, "bad bounds for '" + b.name + "'");
  }
  const std::size_t n = bounds.size();
  std::vector<double> lo(n), hi(n), x0(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = bounds[i].lo, hi[i] = bounds[i].hi;
    auto it = s.start.find(bounds[i].name);
    x0[i] = it != s.start.end() ? std::clamp(it->second, lo[i], hi[i]) : 0.5 * (lo[i] + hi[i]);
  }
  auto params_at = [&](const std::vector<double>& x) {
    ParamMap p = s.fixed;
    for (std::size_t i = 0; i < n; ++i) p[bounds[i].name] = x[i];
    return p;
  };

  OptimizeResult out;
  KGate kg{s.analysis.k, true};
  if (s.k_gate) kg = gate_k(s.template_name, {params_at(x0)}, s.analysis, {"IL_fwd", "ISO_rev"}, s.k_gate_db, 0);
  out.k_used = kg.k;
  out.k_converged = kg.converged;

  const ObjectiveSpec& ob = s.objective;
  if (ob.require_stable && !make_template(s.template_name, split_frequency(params_at(x0)).first).series)
    throw Error(ErrorKind::UnsupportedElement, "stability screening needs a series-coupled device");
  auto score = [&](const ParamMap& p) {
    Scored r;
    try {
      auto [rest, f] = split_frequency(p);
      const Device d = make_template(s.template_name, rest);
      if (ob.require_stable && small_signal_unstable(d)) return r;
      const double fc = analysis_frequency(d, s.analysis, f);
      r.metrics = evaluate_device(d, fc, kg.k, s.analysis);
      double obj = std::max(r.metrics.il_fwd, ob.il_floor) + ob.penalty * std::max(0.0, ob.iso_target - r.metrics.iso_rev);
      if (ob.bandwidth > 0 && ob.bandwidth_weight > 0) {
        const Metrics lo_m = evaluate_device(d, fc - ob.bandwidth / 2, kg.k, s.analysis);
        const Metrics hi_m = evaluate_device(d, fc + ob.bandwidth / 2, kg.k, s.analysis);
        obj += ob.bandwidth_weight * std::max(std::max(lo_m.il_fwd, ob.il_floor), std::max(hi_m.il_fwd, ob.il_floor));
      }
      r.objective = std::isfinite(obj) ? obj : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
    }
    return r;
  };

  Scored best;
  ParamMap best_p;
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int restart = 0;
  auto fn = [&](const std::vector<double>& x) {
    const ParamMap p = params_at(x);
    const Scored r = score(p);
    ++out.evaluations;
    if (better(r, p, best, best_p)) {
      best = r, best_p = p;
      out.trace.push_back({out.evaluations, restart, r.objective, p});
    }
    return r.objective;
  };

  for (restart = 0; restart < std::max(1, s.restarts); ++restart) {
    std::vector<double> start = x0;
    if (restart > 0)
      for (std::size_t i = 0; i < n; ++i) start[i] = lo[i] + unit(rng) * (hi[i] - lo[i]);
    nelder_mead_box(fn, start, lo, hi, s.max_evals);
  }
  if (!std::isfinite(best.objective))
    throw Error(ErrorKind::NoImprovement, "no feasible point found inside the bounds");
  out.best = best_p;
  out.metrics = best.metrics;
  out.objective = best.objective;
  return out;
}

}  // namespace fluxmod
