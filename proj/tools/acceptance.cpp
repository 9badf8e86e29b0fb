// Acceptance checks: one PASS/FAIL line per criterion.  Usage: fluxmod_acceptance [criterion numbers...]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fluxmod/analysis.hpp"
#include "fluxmod/sweep.hpp"
#include "fluxmod/tdoracle.hpp"

using namespace fluxmod;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr int kIsolatorK = 8;
constexpr int kCirculatorK = 8;
constexpr int kAmplifierK = 80;
constexpr double kKTolDb = 0.05;

// Largest K -> K+2 change seen on any reported metric.
double g_k_delta = 0.0;
std::string g_k_where;

Metrics evaluate_reported(const std::string& tmpl, const ParamMap& p, int k, CoefficientMode mode = CoefficientMode::Exact,
                          int port_in = 0, int port_out = 1) {
  AnalysisSpec a;
  a.mode = mode;
  a.port_in = port_in;
  a.port_out = port_out;
  const Metrics m = evaluate_template(tmpl, p, a, k);
  const Metrics m2 = evaluate_template(tmpl, p, a, k + 2);
  const double d = std::max({std::abs(m.il_fwd - m2.il_fwd), std::abs(m.iso_rev - m2.iso_rev), std::abs(m.rl - m2.rl)});
  if (d > g_k_delta) g_k_delta = d, g_k_where = tmpl;
  return m;
}

struct Passband {
  double center = 0, bw1db = 0, worst_s11_db = 0;
  bool found = false;
};

// Edges where |S21| crosses (peak - 1 dB) around the peak; match is judged over the central half.
Passband measure_passband(const Device& d, double lo, double hi, int n) {
  const auto f = linspace(lo, hi, n);
  std::vector<double> s21(n), s11(n);
  for (int i = 0; i < n; ++i) {
    const auto s = device_s(d, build_grid(f[i], d.f_base, 0), CoefficientMode::Exact);
    s21[i] = to_db(s(1, 0, 0, 0));
    s11[i] = to_db(s(0, 0, 0, 0));
  }
  Passband pb;
  const int ip = int(std::max_element(s21.begin(), s21.end()) - s21.begin());
  const double level = s21[ip] - 1.0;
  int a = ip, b = ip;
  while (a > 0 && s21[a - 1] >= level) --a;
  while (b < n - 1 && s21[b + 1] >= level) ++b;
  if (a == 0 || b == n - 1) return pb;
  auto cross = [&](int i, int j) { return f[i] + (level - s21[i]) * (f[j] - f[i]) / (s21[j] - s21[i]); };
  const double fl = cross(a - 1, a), fh = cross(b, b + 1);
  pb.center = 0.5 * (fl + fh);
  pb.bw1db = fh - fl;
  pb.worst_s11_db = -400;
  for (int i = 0; i < n; ++i)
    if (std::abs(f[i] - pb.center) <= 0.25 * pb.bw1db) pb.worst_s11_db = std::max(pb.worst_s11_db, s11[i]);
  pb.found = true;
  return pb;
}

bool passband_ok(const Passband& p) {
  return p.found && std::abs(p.center - 6e9) <= 0.2e9 && std::abs(p.bw1db - 700e6) <= 100e6 && p.worst_s11_db <= -15.0;
}

Outcome c1_static_filter() {
  IsolatorParams p;
  p.amplitude = 0.0;
  const Device fab = isolator_from_capacitors(257e-15, 113e-15, 232e-15, 284e-15, p);
  const Passband a = measure_passband(fab, 4e9, 9e9, 2001);
  const Passband b = measure_passband(isolator_template(p), 4e9, 8e9, 1601);
  Outcome o;
  o.pass = passband_ok(a);
  o.detail = fmt("fabricated capacitor set: centre %.3f GHz, 1-dB bw %.0f MHz, S11 %.1f dB; synthesized: %.3f GHz, %.0f MHz, %.1f dB",
                 a.center / 1e9, a.bw1db / 1e6, a.worst_s11_db, b.center / 1e9, b.bw1db / 1e6, b.worst_s11_db);
  return o;
}

Outcome c2_isolator_taylor3() {
  Outcome o{true, ""};
  for (double amp : {0.024, 0.025}) {
    const Metrics m = evaluate_reported("isolator3", {{"dc", 0.35}, {"amp", amp}, {"fm", 700e6}, {"theta", 90}}, kIsolatorK,
                                        CoefficientMode::Taylor3);
    o.pass = o.pass && m.il_fwd <= 0.7 && m.iso_rev >= 20.0;
    o.detail += fmt("%samp %.3f: IL %.2f dB ISO %.2f dB", o.detail.empty() ? "" : "; ", amp, m.il_fwd, m.iso_rev);
  }
  return o;
}

Outcome c3_two_resonator() {
  OptimizeSpec s;
  s.template_name = "isolator2";
  s.objective.bounds = {{"amp", 0.005, 0.045}, {"fm", 300e6, 900e6}, {"theta", 30, 150}};
  s.objective.iso_target = 20.0;
  s.analysis.k = kIsolatorK;
  s.k_gate = false;
  const auto r = optimize(s);
  const Metrics m = evaluate_reported("isolator2", r.best, kIsolatorK);
  Outcome o;
  o.pass = m.iso_rev >= 20.0 - 1e-3 && std::abs(m.il_fwd - 4.64) <= 1.0;
  o.detail = fmt("optimum amp %.4f fm %.0f MHz theta %.1f: IL %.2f dB ISO %.2f dB", r.best.at("amp"), r.best.at("fm") / 1e6,
                 r.best.at("theta"), m.il_fwd, m.iso_rev);
  return o;
}

Outcome c4_bias_tuning() {
  double fmin = 1e300, fmax = 0, worst_il = 0, worst_iso = 1e300;
  double span_lo = 1e300, span_hi = 0;
  bool all = true;
  for (int i = 0; i <= 10; ++i) {
    const double dc = 0.30 + 0.01 * i;
    const Device d = make_template("isolator3", {{"dc", dc}});
    const Metrics m = evaluate_reported("isolator3", {{"dc", dc}}, kIsolatorK);
    fmin = std::min(fmin, d.f_center), fmax = std::max(fmax, d.f_center);
    worst_il = std::max(worst_il, m.il_fwd), worst_iso = std::min(worst_iso, m.iso_rev);
    const bool ok = m.il_fwd < 0.5 && m.iso_rev > 20.0;
    all = all && ok;
    if (ok) span_lo = std::min(span_lo, d.f_center), span_hi = std::max(span_hi, d.f_center);
  }
  Outcome o;
  o.pass = all && fmax - fmin >= 1.5e9;
  o.detail = fmt("centre %.2f-%.2f GHz, worst IL %.2f dB, worst ISO %.2f dB; thresholds hold over %.2f GHz", fmin / 1e9,
                 fmax / 1e9, worst_il, worst_iso, span_hi > span_lo ? (span_hi - span_lo) / 1e9 : 0.0);
  return o;
}

Outcome c5_circulator() {
  OptimizeSpec s;
  s.template_name = "wye1";
  s.objective.bounds = {{"amp", 0.01, 0.045}};
  s.objective.iso_target = 25.0;
  s.analysis.k = kCirculatorK;
  s.k_gate = false;
  const auto one = optimize(s);
  const Metrics m1 = evaluate_reported("wye1", one.best, kCirculatorK);

  const Metrics m2 = evaluate_reported("wye2", {}, kCirculatorK);

  s.template_name = "wye2";
  s.objective.bounds = {{"amp", 0.02, 0.04}, {"f", 5.9e9, 6.1e9}};
  s.objective.iso_target = 35.0;
  const auto best = optimize(s);
  const Metrics m3 = evaluate_reported("wye2", best.best, kCirculatorK);

  Outcome o;
  const bool ok1 = std::abs(m1.il_fwd - 2.7) <= 0.7 && m1.iso_rev >= 25.0 - 1e-3;
  const bool ok2 = m2.il_fwd <= 0.3 && m2.iso_rev >= 25.0;
  const bool ok3 = m3.il_fwd <= 0.1 && m3.iso_rev >= 35.0;
  o.pass = ok1 && ok2 && ok3;
  o.detail = fmt("1-layer amp %.4f: IL %.2f ISO %.1f; 2-layer: IL %.3f ISO %.1f; theta 120 at amp %.4f f %.4f GHz: IL %.4f ISO %.1f dB",
                 one.best.at("amp"), m1.il_fwd, m1.iso_rev, m2.il_fwd, m2.iso_rev, best.best.at("amp"),
                 best.best.at("f") / 1e9, m3.il_fwd, m3.iso_rev);
  return o;
}

Outcome c6_circulator_tuning() {
  double fmin = 1e300, fmax = 0, worst_il = 0, worst_iso = 1e300;
  for (int i = 0; i <= 6; ++i) {
    const double dc = 0.339 + (0.368 - 0.339) * i / 6.0;
    const Device d = make_template("wye2", {{"dc", dc}});
    const Metrics m = evaluate_reported("wye2", {{"dc", dc}}, kCirculatorK);
    fmin = std::min(fmin, d.f_center), fmax = std::max(fmax, d.f_center);
    worst_il = std::max(worst_il, m.il_fwd), worst_iso = std::min(worst_iso, m.iso_rev);
  }
  Outcome o;
  o.pass = fmax - fmin >= 500e6 && worst_il < 0.2 && worst_iso > 15.0;
  o.detail = fmt("2-layer tuning %.0f MHz, worst IL %.3f dB, worst ISO %.2f dB", (fmax - fmin) / 1e6, worst_il, worst_iso);
  return o;
}

Outcome c7_amplifier() {
  OptimizeSpec s;
  s.template_name = "diramp";
  s.objective.bounds = {{"lfamp", 0.025, 0.045}, {"pumpamp", 0.03, 0.05}, {"f", 6.8e9, 7.0e9}};
  s.start = {{"lfamp", 0.0335}, {"pumpamp", 0.0397}, {"f", 6.887e9}};
  s.objective.iso_target = 6.0;
  s.objective.il_floor = -10.5;
  s.objective.require_stable = true;
  s.analysis.k = kAmplifierK;
  s.k_gate = false;
  s.restarts = 1;
  s.max_evals = 50;
  const auto r = optimize(s);

  ParamMap pumps = r.best;
  const double f_best = pumps.at("f");
  pumps.erase("f");
  const Device d = make_template("diramp", pumps);
  const double radius = floquet_spectral_radius(build_state_space(d.series->pi_realized(d.f_design), d.f_base));

  const Metrics at = evaluate_reported("diramp", r.best, kAmplifierK);
  double peak_dir = -1e300, f_peak = 0;
  // 5 MHz grid offset by 2.5 MHz keeps every sideband clear of DC
  for (double f : linspace(6.8025e9, 6.9975e9, 40)) {
    ParamMap p = pumps;
    p["f"] = f;
    try {
      const Metrics m = evaluate_template("diramp", p, AnalysisSpec{}, kAmplifierK);
      if (m.directionality > peak_dir) peak_dir = m.directionality, f_peak = f;
    } catch (const Error&) {
    }
  }
  Outcome o;
  o.pass = at.gain >= 10.0 && -at.iso_rev <= 0.0 && peak_dir >= 15.0 && radius < 1.0;
  o.detail = fmt("lfamp %.4f pumpamp %.4f: gain %.2f dB reverse %.2f dB at %.4f GHz; peak directionality %.1f dB at %.3f GHz; "
                 "Floquet radius %.4f",
                 pumps.at("lfamp"), pumps.at("pumpamp"), at.gain, -at.iso_rev, f_best / 1e9, peak_dir, f_peak / 1e9, radius);
  return o;
}

// ---- properties --------------------------------------------------------------

SquidSpec squid(double dc, double amp, double phase) {
  SquidSpec s;
  s.n_stack = 10;
  s.phi_dc = dc;
  if (amp > 0) s.pumps.push_back({amp, 1, phase});
  return s;
}

SeriesNetwork random_chain(std::mt19937_64& rng, int order, double amp, bool equal_phase) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SeriesNetwork net;
  for (int i = 0; i < order; ++i) {
    net.stages.push_back(SeriesStage::inverter(0.004 + 0.02 * u(rng), u(rng) < 0.5 ? 1 : -1));
    const double phase = equal_phase ? 0.7 : kTwoPi * u(rng);
    net.stages.push_back(SeriesStage::resonator(300e-15 + 600e-15 * u(rng), squid(0.30 + 0.08 * u(rng), amp * u(rng), phase)));
  }
  net.stages.push_back(SeriesStage::inverter(0.004 + 0.02 * u(rng)));
  return net;
}

double maxdiff(const SpectralMatrix& a, const SpectralMatrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

Outcome c8_properties() {
  std::mt19937_64 rng(2024);
  double unitarity = 0, recip0 = 0, recip_eq = 0, gauge = 0, exchange = 0, mirror = 0, engines = 0, coeff = 0;

  for (int t = 0; t < 20; ++t) {
    const auto net = random_chain(rng, 2 + t % 3, 0.0, false);
    const auto g = build_grid(5.5e9 + 0.05e9 * t, 0.5e9, 2);
    const auto s = chain_s(net.chain(g, CoefficientMode::Exact)).matrix();
    unitarity = std::max(unitarity, maxdiff(s.adjoint() * s, SpectralMatrix::Identity(s.rows(), s.cols())));
    const auto sm = chain_s(net.chain(g, CoefficientMode::Exact));
    recip0 = std::max(recip0, maxdiff(sm.block(1, 0), sm.block(0, 1)));
  }
  for (int t = 0; t < 10; ++t) {
    auto net = random_chain(rng, 3, 0.04, true);
    const auto g = build_grid(6.02e9, 0.5e9, 4);
    const auto s = chain_s(net.chain(g, CoefficientMode::Exact));
    recip_eq = std::max(recip_eq, std::abs(s(1, 0, 0, 0) - s(0, 0, 1, 0)));

    auto staggered = random_chain(rng, 3, 0.04, false);
    const auto s0 = chain_s(staggered.chain(g, CoefficientMode::Exact));
    for (auto* sq : staggered.squids()) *sq = sq->time_shifted(0.917);
    const auto s1 = chain_s(staggered.chain(g, CoefficientMode::Exact));
    gauge = std::max(gauge, (s0.matrix().cwiseAbs() - s1.matrix().cwiseAbs()).cwiseAbs().maxCoeff());

    const auto a = chain_s(staggered.chain(g, CoefficientMode::Exact));
    const auto b = solve_floquet_s(staggered.graph(), g);
    engines = std::max(engines, maxdiff(a.matrix(), b.matrix()));
  }
  {
    // direction exchange under theta -> theta + 180 at the 90 degree operating point, and theta -> -theta in general
    auto s_at = [](double theta_deg) {
      const Device d = make_template("isolator3", {{"theta", theta_deg}});
      return chain_s(d.series->chain(build_grid(6e9, d.f_base, kIsolatorK), CoefficientMode::Exact));
    };
    const auto s90 = s_at(90), s270 = s_at(270);
    for (int k = -kIsolatorK; k <= kIsolatorK; ++k) {
      exchange = std::max(exchange, std::abs(std::abs(s90(1, k, 0, 0)) - std::abs(s270(0, k, 1, 0))));
      exchange = std::max(exchange, std::abs(std::abs(s90(0, k, 1, 0)) - std::abs(s270(1, k, 0, 0))));
    }
    for (double th : {40.0, 75.0, 120.0, 150.0}) {
      const auto p = s_at(th), m = s_at(-th);
      for (int k = -kIsolatorK; k <= kIsolatorK; ++k)
        mirror = std::max(mirror, std::abs(std::abs(p(1, k, 0, 0)) - std::abs(m(0, k, 1, 0))));
    }
  }
  {
    SquidSpec s = squid(0.35, 0.025, 0.3);
    s.i_c = 4e-6;
    CoefficientOptions co;
    co.p_max = 3;
    const auto t3 = inverse_inductance_coefficients(s, CoefficientMode::Taylor3, co);
    const auto ex = inverse_inductance_coefficients(s, CoefficientMode::Exact, co);
    for (int p = -1; p <= 1; ++p) coeff = std::max(coeff, std::abs(t3(p) - ex(p)) / std::abs(ex(p)));
  }
  // truncation stability at the default operating point of every template
  for (const auto& t : template_catalog()) {
    const int k = t.name == "diramp" ? kAmplifierK : t.name.rfind("wye", 0) == 0 ? kCirculatorK : kIsolatorK;
    ParamMap p;
    if (t.name == "diramp") p["f"] = 6.887e9;
    const Metrics m = evaluate_reported(t.name, p, k);
    (void)m;
  }

  Outcome o;
  o.pass = unitarity <= 1e-9 && recip0 <= 1e-10 && recip_eq <= 1e-10 && gauge <= 1e-9 && exchange <= 1e-9 &&
           mirror <= 1e-9 && engines <= 1e-9 && coeff <= 0.005 && g_k_delta <= kKTolDb;
  o.detail = fmt("unitarity %.1e, reciprocity %.1e/%.1e, gauge %.1e, exchange 90/270 %.1e, mirror %.1e, engines %.1e, "
                 "taylor3 %.1e, K->K+2 %.1e dB (worst: %s)",
                 unitarity, recip0, recip_eq, gauge, exchange, mirror, engines, coeff, g_k_delta, g_k_where.c_str());
  return o;
}

Outcome c9_oracle() {
  Outcome o{true, ""};
  for (const char* name : {"isolator2", "isolator3"}) {
    const auto t0 = std::chrono::steady_clock::now();
    const Device d = make_template(name, {});
    OracleOptions opt;
    opt.floor_db = -40.0;
    opt.tolerance_db = 0.1;
    const auto rep = oracle_compare(d, d.f_center, kIsolatorK, opt);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    int compared = 0;
    for (const auto& r : rep.rows) compared += r.compared;
    o.pass = o.pass && rep.pass && secs <= 120.0;
    o.detail += fmt("%s%s: %d harmonics, max error %.4f dB, %.1f s", o.detail.empty() ? "" : "; ", name, compared,
                    rep.max_error_db, secs);
  }
  return o;
}

Outcome c10_spectra() {
  const Device d = make_template("isolator3", {});
  const auto fwd = output_spectrum(d, d.f_center, kIsolatorK, CoefficientMode::Exact, {0});
  const auto rev = output_spectrum(d, d.f_center, kIsolatorK, CoefficientMode::Exact, {1});
  double fwd0 = 0, rev0 = 0, near = 0, far = 0;
  for (const auto& l : fwd)
    if (l.k == 0) fwd0 = l.power[1];
  for (const auto& l : rev) {
    if (l.k == 0) rev0 = l.power[0];
    if (l.k == 0) continue;
    for (double p : l.power) (std::abs(l.k) <= 2 ? near : far) += p;
  }
  Outcome o;
  const double share = near / (near + far);
  o.pass = 10 * std::log10(fwd0) >= -1.0 && 10 * std::log10(rev0) <= -20.0 && share >= 0.9;
  o.detail = fmt("forward k=0 %.2f dB, reverse k=0 %.2f dB, |k|<=2 carries %.1f%% of reverse sideband power",
                 10 * std::log10(fwd0), 10 * std::log10(rev0), 100 * share);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"static filter", c1_static_filter},        {"isolator taylor3", c2_isolator_taylor3},
      {"two-resonator isolator", c3_two_resonator}, {"bias tuning", c4_bias_tuning},
      {"circulator", c5_circulator},              {"circulator tuning", c6_circulator_tuning},
      {"directional amplifier", c7_amplifier},    {"property suite", c8_properties},
      {"oracle equivalence", c9_oracle},          {"spectra", c10_spectra},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("C%-2d %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
