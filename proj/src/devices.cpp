#include "fluxmod/devices.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace fluxmod {

// ---- series networks --------------------------------------------------------

namespace {

void check_series_shape(const SeriesNetwork& s) {
  const auto& st = s.stages;
  if (st.size() < 3 || st.size() % 2 == 0)
    throw Error(ErrorKind::InvalidArgument, "series network must alternate inverter, resonator, ..., inverter");
  for (std::size_t i = 0; i < st.size(); ++i) {
    const bool want_inv = i % 2 == 0;
    if ((st[i].kind == SeriesStage::Kind::Inverter) != want_inv)
      throw Error(ErrorKind::InvalidArgument, "series network must alternate inverter, resonator, ..., inverter");
  }
}

int resonator_count(const SeriesNetwork& s) { return int(s.stages.size() / 2); }

}  // namespace

TwoPortChain SeriesNetwork::chain(const FrequencyGrid& grid, CoefficientMode mode) const {
  check_series_shape(*this);
  TwoPortChain out{grid, {}, z0};
  CoefficientOptions co;
  co.p_max = 2 * grid.k_max();
  for (const auto& st : stages) {
    if (st.kind == SeriesStage::Kind::Inverter) {
      out.stages.push_back(jinverter_abcd(st.j, grid, st.sign));
    } else {
      SpectralMatrix y = capacitor_spectral_admittance(st.c, grid);
      if (st.squid) y += squid_spectral_admittance(inverse_inductance_coefficients(*st.squid, mode, co), grid);
      out.stages.push_back(shunt_abcd(y));
    }
  }
  return out;
}

DeviceGraph SeriesNetwork::graph() const {
  check_series_shape(*this);
  const int n = resonator_count(*this);
  DeviceGraph g;
  const int p1 = g.add_node("p1");
  std::vector<int> r(n);
  for (int i = 0; i < n; ++i) r[i] = g.add_node("r" + std::to_string(i + 1));
  const int p2 = g.add_node("p2");
  for (int i = 0; i < n; ++i) {
    const auto& st = stages[2 * i + 1];
    g.add_capacitor("c" + std::to_string(i + 1), r[i], st.c);
    if (st.squid) g.add_squid("sq" + std::to_string(i + 1), r[i], *st.squid);
  }
  for (int i = 0; i <= n; ++i) {
    const auto& st = stages[2 * i];
    const int a = i == 0 ? p1 : r[i - 1];
    const int b = i == n ? p2 : r[i];
    g.add_jinverter("j" + std::to_string(i), a, b, st.j, st.sign);
  }
  g.add_port(p1, z0);
  g.add_port(p2, z0);
  return g;
}

DeviceGraph SeriesNetwork::pi_realized(double f_center) const {
  check_series_shape(*this);
  const int n = resonator_count(*this);
  std::vector<std::vector<double>> corr(n);
  std::vector<double> coupling(n + 1);
  for (int i = 0; i <= n; ++i) {
    const auto& st = stages[2 * i];
    const bool port_side = i == 0 || i == n;
    if (port_side) {
      const PiInverter pi = pi_port_inverter(st.j, f_center, z0);
      coupling[i] = pi.coupling;
      corr[i == 0 ? 0 : n - 1].push_back(pi.correction);
    } else {
      const PiInverter pi = pi_capacitive_inverter(st.j, f_center);
      coupling[i] = pi.coupling;
      corr[i - 1].push_back(pi.correction);
      corr[i].push_back(pi.correction);
    }
  }

  DeviceGraph g;
  const int p1 = g.add_node("p1");
  std::vector<int> r(n);
  for (int i = 0; i < n; ++i) r[i] = g.add_node("r" + std::to_string(i + 1));
  const int p2 = g.add_node("p2");
  for (int i = 0; i < n; ++i) {
    const auto& st = stages[2 * i + 1];
    g.add_capacitor("c" + std::to_string(i + 1), r[i], absorb(st.c, corr[i]));
    if (st.squid) g.add_squid("sq" + std::to_string(i + 1), r[i], *st.squid);
  }
  for (int i = 0; i <= n; ++i) {
    const int a = i == 0 ? p1 : r[i - 1];
    const int b = i == n ? p2 : r[i];
    g.add_capacitor("cc" + std::to_string(i), a, coupling[i], b);
  }
  g.add_port(p1, z0);
  g.add_port(p2, z0);
  return g;
}

std::vector<SquidSpec*> SeriesNetwork::squids() {
  std::vector<SquidSpec*> out;
  for (auto& st : stages)
    if (st.squid) out.push_back(&*st.squid);
  return out;
}

// ---- synthesis --------------------------------------------------------------

std::vector<double> maximally_flat_g(int order) {
  if (order < 1) throw Error(ErrorKind::InvalidArgument, "order must be >= 1");
  std::vector<double> g(order + 2, 1.0);
  for (int k = 1; k <= order; ++k) g[k] = 2.0 * std::sin((2.0 * k - 1.0) * kPi / (2.0 * order));
  return g;
}

PrototypeDesign static_prototype_synthesis(int order, double f_center, double bandwidth, double z0,
                                           double l_resonator) {
  if (order < 2 || order > 4) throw Error(ErrorKind::InvalidArgument, "order must be 2, 3 or 4");
  if (!(f_center > 0) || !(z0 > 0) || !(l_resonator > 0) || !(bandwidth >= 0))
    throw Error(ErrorKind::InvalidArgument, "synthesis needs positive f_center, z0, inductance");
  const auto g = maximally_flat_g(order);
  // 1-dB edge of a maximally flat response sits below the 3-dB edge
  const double fbw = bandwidth / f_center / std::pow(std::pow(10.0, 0.1) - 1.0, 1.0 / (2.0 * order));
  const double w0 = kTwoPi * f_center;
  PrototypeDesign d;
  d.capacitance = 1.0 / (w0 * w0 * l_resonator);
  const double g0 = 1.0 / z0;
  d.j.push_back(std::sqrt(g0 * w0 * d.capacitance * fbw / (g[0] * g[1])));
  for (int i = 1; i < order; ++i) d.j.push_back(w0 * d.capacitance * fbw / std::sqrt(g[i] * g[i + 1]));
  d.j.push_back(std::sqrt(g0 * w0 * d.capacitance * fbw / (g[order] * g[order + 1])));
  return d;
}

PiInverter pi_capacitive_inverter(double j, double f_center) {
  if (!(j > 0)) throw Error(ErrorKind::NonPositiveJ, "inverter J must be > 0");
  if (!(f_center > 0)) throw Error(ErrorKind::InvalidArgument, "f_center must be > 0");
  const double cc = j / (kTwoPi * f_center);
  return {cc, -cc};
}

PiInverter pi_port_inverter(double j, double f_center, double z0) {
  if (!(j > 0)) throw Error(ErrorKind::NonPositiveJ, "inverter J must be > 0");
  if (!(f_center > 0) || !(z0 > 0)) throw Error(ErrorKind::InvalidArgument, "f_center and z0 must be > 0");
  const double jz = j * z0;
  if (!(jz < 1.0)) throw Error(ErrorKind::InvalidArgument, "port inverter needs J*z0 < 1");
  const double w = kTwoPi * f_center;
  const double cc = j / (w * std::sqrt(1.0 - jz * jz));
  const double x = w * cc * z0;
  return {cc, -cc / (1.0 + x * x)};
}

double absorb(double c, const std::vector<double>& corrections) {
  double out = c;
  for (double x : corrections) out += x;
  if (!(out > 0))
    throw Error(ErrorKind::NegativeAbsorbedCapacitance,
                "absorbing the inverter shunts leaves " + std::to_string(out * 1e15) + " fF");
  return out;
}

double tuned_center(double f_design, double phi_dc, double phi_design) {
  const double r = std::cos(kPi * phi_dc) / std::cos(kPi * phi_design);
  if (!(r > 0)) throw Error(ErrorKind::FluxBeyondHalfQuantum, "bias beyond half a flux quantum");
  return f_design * std::sqrt(r);
}

// ---- templates --------------------------------------------------------------

namespace {

SquidSpec base_squid(double ic, int n_stack, double dc, double margin) {
  SquidSpec s;
  s.i_c = ic, s.n_stack = n_stack, s.phi_dc = dc, s.margin = margin;
  return s;
}

}  // namespace

Device isolator_template(const IsolatorParams& p) {
  if (p.order < 2 || p.order > 4) throw Error(ErrorKind::InvalidArgument, "isolator order must be 2, 3 or 4");
  if (!(p.f_mod > 0)) throw Error(ErrorKind::NonPositiveBase, "modulation frequency must be > 0");
  const SquidSpec design = base_squid(p.i_c, p.n_stack, p.phi_design, p.margin);
  const PrototypeDesign proto =
      static_prototype_synthesis(p.order, p.f_center, p.bandwidth, p.z0, squid_inductance(design, p.phi_design));

  std::vector<double> caps(p.order, proto.capacitance);
  std::vector<double> js = proto.j;
  if (!p.capacitors.empty()) {
    if (int(p.capacitors.size()) != p.order) throw Error(ErrorKind::InvalidArgument, "need one capacitor per resonator");
    caps = p.capacitors;
  }
  if (!p.j_values.empty()) {
    if (int(p.j_values.size()) != p.order + 1) throw Error(ErrorKind::InvalidArgument, "need order+1 inverter values");
    js = p.j_values;
  }

  SeriesNetwork net;
  net.z0 = p.z0;
  for (int i = 0; i < p.order; ++i) {
    net.stages.push_back(SeriesStage::inverter(js[i]));
    SquidSpec sq = base_squid(p.i_c, p.n_stack, p.phi_dc, p.margin);
    if (p.amplitude > 0) sq.pumps.push_back({p.amplitude, p.harmonic, i * p.theta});
    net.stages.push_back(SeriesStage::resonator(caps[i], sq));
  }
  net.stages.push_back(SeriesStage::inverter(js[p.order]));

  Device d;
  d.name = "isolator" + std::to_string(p.order);
  d.graph = net.graph();
  d.graph.validate();
  d.series = std::move(net);
  d.f_base = p.f_mod / p.harmonic;
  d.f_center = tuned_center(p.f_center, p.phi_dc, p.phi_design);
  d.f_design = p.f_center;
  d.k_default = 8;
  return d;
}

Device isolator_from_capacitors(double c1, double c2, double c3, double c4, const IsolatorParams& p) {
  DeviceGraph g;
  const int p1 = g.add_node("p1");
  const int r1 = g.add_node("r1"), r2 = g.add_node("r2"), r3 = g.add_node("r3");
  const int p2 = g.add_node("p2");
  const int r[3] = {r1, r2, r3};
  const double shunt[3] = {c3, c4, c3};
  for (int i = 0; i < 3; ++i) {
    g.add_capacitor("c" + std::to_string(i + 1), r[i], shunt[i]);
    SquidSpec sq = base_squid(p.i_c, p.n_stack, p.phi_dc, p.margin);
    if (p.amplitude > 0) sq.pumps.push_back({p.amplitude, p.harmonic, i * p.theta});
    g.add_squid("sq" + std::to_string(i + 1), r[i], sq);
  }
  g.add_capacitor("cc0", p1, c1, r1);
  g.add_capacitor("cc1", r1, c2, r2);
  g.add_capacitor("cc2", r2, c2, r3);
  g.add_capacitor("cc3", r3, c1, p2);
  g.add_port(p1, p.z0);
  g.add_port(p2, p.z0);
  g.validate();

  Device d;
  d.name = "isolator3-capacitors";
  d.graph = std::move(g);
  d.f_base = p.f_mod / p.harmonic;
  d.f_center = tuned_center(p.f_center, p.phi_dc, p.phi_design);
  d.f_design = p.f_center;
  return d;
}

Device circulator_template(const CirculatorParams& p) {
  if (p.layers < 1 || p.layers > 3) throw Error(ErrorKind::InvalidArgument, "layers must be 1, 2 or 3");
  if (!(p.f_mod > 0)) throw Error(ErrorKind::NonPositiveBase, "modulation frequency must be > 0");
  if (!p.layer_phases.empty() && int(p.layer_phases.size()) != p.layers)
    throw Error(ErrorKind::InvalidArgument, "need one phase offset per layer");
  const SquidSpec design = base_squid(p.i_c, p.n_stack, p.phi_design, p.margin);
  const double w0 = kTwoPi * p.f_center;
  const double cr = 1.0 / (w0 * w0 * squid_inductance(design, p.phi_design));
  const double jp = p.j_port / std::sqrt(double(p.layers));

  DeviceGraph g;
  int port[3];
  for (int i = 0; i < 3; ++i) port[i] = g.add_node("p" + std::to_string(i + 1));
  for (int l = 0; l < p.layers; ++l) {
    const double off = p.layer_phases.empty() ? l * kTwoPi / p.layers : p.layer_phases[l];
    const std::string tag = "l" + std::to_string(l + 1);
    const int centre = g.add_node(tag + "c");
    for (int i = 0; i < 3; ++i) {
      const std::string id = tag + "r" + std::to_string(i + 1);
      const int r = g.add_node(id);
      SquidSpec sq = base_squid(p.i_c, p.n_stack, p.phi_dc, p.margin);
      if (p.amplitude > 0) sq.pumps.push_back({p.amplitude, 1, i * p.theta + off});
      g.add_capacitor("c_" + id, r, cr);
      g.add_squid("sq_" + id, r, sq);
      g.add_jinverter("jp_" + id, port[i], r, jp);
      g.add_jinverter("jc_" + id, r, centre, p.j_center);
    }
  }
  for (int i = 0; i < 3; ++i) g.add_port(port[i], p.z0);
  g.validate();

  Device d;
  d.name = "wye" + std::to_string(p.layers);
  d.graph = std::move(g);
  d.f_base = p.f_mod;
  d.f_center = tuned_center(p.f_center, p.phi_dc, p.phi_design);
  d.f_design = p.f_center;
  d.k_default = 8;
  return d;
}

Device amplifier_template(const AmplifierParams& p) {
  if (!(p.f_base > 0)) throw Error(ErrorKind::NonPositiveBase, "f_base must be > 0");
  const double ratio = p.pump_frequency / p.f_base;
  const int h3 = int(std::lround(ratio));
  if (h3 < 1 || std::abs(ratio - h3) > 1e-9 * ratio)
    throw Error(ErrorKind::IncommensuratePump, "three-wave pump is not an integer multiple of f_base");
  if (p.lf_harmonic < 1) throw Error(ErrorKind::IncommensuratePump, "low-frequency harmonic must be >= 1");

  const SquidSpec bias = base_squid(p.i_c, p.n_stack, p.phi_dc, p.margin);
  const PrototypeDesign proto =
      static_prototype_synthesis(3, p.f_center, p.bandwidth, p.z0, squid_inductance(bias, p.phi_dc));

  SeriesNetwork net;
  net.z0 = p.z0;
  for (int i = 0; i < 3; ++i) {
    net.stages.push_back(SeriesStage::inverter(proto.j[i]));
    SquidSpec sq = bias;
    if (p.lf_amplitude > 0) sq.pumps.push_back({p.lf_amplitude, p.lf_harmonic, i * p.lf_step});
    if (p.pump_amplitude > 0) sq.pumps.push_back({p.pump_amplitude, h3, p.pump_phase});
    net.stages.push_back(SeriesStage::resonator(proto.capacitance, sq));
  }
  net.stages.push_back(SeriesStage::inverter(proto.j[3]));

  Device d;
  d.name = "diramp";
  d.graph = net.graph();
  d.graph.validate();
  d.series = std::move(net);
  d.f_base = p.f_base;
  d.f_center = p.f_center;
  d.f_design = p.f_center;
  d.k_default = std::max(80, h3 + 8);
  return d;
}

// ---- named access -----------------------------------------------------------

namespace {

// rounded so nominal angles print cleanly
double deg(double r) { return std::round(r * 180.0 / kPi * 1e9) / 1e9; }
double rad(double d) { return d * kPi / 180.0; }

ParamMap isolator_defaults(int order) {
  const IsolatorParams p;
  ParamMap m{{"f0", p.f_center}, {"bw", p.bandwidth},     {"z0", p.z0},        {"ic", p.i_c},
             {"stack", double(p.n_stack)}, {"dc", p.phi_dc}, {"design_dc", p.phi_design},
             {"amp", p.amplitude}, {"fm", p.f_mod},       {"harm", double(p.harmonic)},
             {"theta", deg(p.theta)}, {"margin", p.margin}};
  if (order == 2) {
    // 2-resonator operating point from the constrained optimization (isolation >= 20 dB)
    m["amp"] = 0.0395;
    m["fm"] = 650e6;
  }
  return m;
}

ParamMap circulator_defaults(int layers) {
  const CirculatorParams p;
  ParamMap m{{"f0", p.f_center},  {"z0", p.z0}, {"ic", p.i_c},       {"stack", double(p.n_stack)},
             {"dc", p.phi_dc},    {"design_dc", p.phi_design},       {"jp", p.j_port},
             {"jc", p.j_center},  {"amp", p.amplitude},              {"fm", p.f_mod},
             {"theta", deg(p.theta)}, {"margin", p.margin}};
  if (layers == 2) m["amp"] = 0.0295;
  if (layers == 3) m["amp"] = 0.0295;
  return m;
}

ParamMap amplifier_defaults() {
  const AmplifierParams p;
  return {{"f0", p.f_center},          {"bw", p.bandwidth},     {"z0", p.z0},
          {"ic", p.i_c},               {"stack", double(p.n_stack)}, {"dc", p.phi_dc},
          {"fbase", p.f_base},         {"lfamp", p.lf_amplitude}, {"lfharm", double(p.lf_harmonic)},
          {"lfstep", deg(p.lf_step)},  {"pumpamp", p.pump_amplitude}, {"fpump", p.pump_frequency},
          {"pumpphase", deg(p.pump_phase)}, {"margin", p.margin}};
}

int as_int(double v, const std::string& key) {
  if (std::abs(v - std::round(v)) > 1e-9) throw Error(ErrorKind::InvalidArgument, key + " must be an integer");
  return int(std::lround(v));
}

}  // namespace

const std::vector<TemplateInfo>& template_catalog() {
  static const std::vector<TemplateInfo> cat = {
      {"isolator2", "2-resonator flux-modulated isolator", isolator_defaults(2)},
      {"isolator3", "3-resonator flux-modulated isolator", isolator_defaults(3)},
      {"isolator4", "4-resonator flux-modulated isolator", isolator_defaults(4)},
      {"wye1", "single-layer wye circulator", circulator_defaults(1)},
      {"wye2", "two-layer wye circulator, layers 180 deg apart", circulator_defaults(2)},
      {"wye3", "three-layer wye circulator, layers 120 deg apart", circulator_defaults(3)},
      {"diramp", "directional amplifier, three-wave pump plus staggered low-frequency pump", amplifier_defaults()},
  };
  return cat;
}

bool is_template(const std::string& name) {
  for (const auto& t : template_catalog())
    if (t.name == name) return true;
  return false;
}

ParamMap template_defaults(const std::string& name) {
  for (const auto& t : template_catalog())
    if (t.name == name) return t.defaults;
  throw Error(ErrorKind::InvalidArgument, "unknown template '" + name + "'");
}

Device make_template(const std::string& name, const ParamMap& overrides) {
  ParamMap m = template_defaults(name);
  const bool isolator = name.rfind("isolator", 0) == 0;
  const int order = isolator ? name.back() - '0' : 0;
  std::map<int, double> caps, js;
  for (const auto& [k, v] : overrides) {
    if (m.count(k)) {
      m[k] = v;
      continue;
    }
    if (isolator && k.size() >= 2 && (k[0] == 'c' || k[0] == 'j') &&
        std::all_of(k.begin() + 1, k.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      const int idx = std::stoi(k.substr(1));
      if (k[0] == 'c' && idx >= 1 && idx <= order) {
        caps[idx] = v;
        continue;
      }
      if (k[0] == 'j' && idx >= 0 && idx <= order) {
        js[idx] = v;
        continue;
      }
    }
    throw Error(ErrorKind::InvalidArgument, "template " + name + " has no parameter '" + k + "'");
  }

  if (isolator) {
    IsolatorParams p;
    p.order = order;
    p.f_center = m["f0"], p.bandwidth = m["bw"], p.z0 = m["z0"], p.i_c = m["ic"];
    p.n_stack = as_int(m["stack"], "stack"), p.phi_dc = m["dc"], p.phi_design = m["design_dc"];
    p.amplitude = m["amp"], p.f_mod = m["fm"], p.harmonic = as_int(m["harm"], "harm");
    p.theta = rad(m["theta"]), p.margin = m["margin"];
    if (!caps.empty() || !js.empty()) {
      const SquidSpec design = base_squid(p.i_c, p.n_stack, p.phi_design, p.margin);
      const PrototypeDesign proto =
          static_prototype_synthesis(p.order, p.f_center, p.bandwidth, p.z0, squid_inductance(design, p.phi_design));
      p.capacitors.assign(order, proto.capacitance);
      p.j_values = proto.j;
      for (auto [i, v] : caps) p.capacitors[i - 1] = v;
      for (auto [i, v] : js) p.j_values[i] = v;
    }
    return isolator_template(p);
  }
  if (name.rfind("wye", 0) == 0) {
    CirculatorParams p;
    p.layers = name.back() - '0';
    p.f_center = m["f0"], p.z0 = m["z0"], p.i_c = m["ic"], p.n_stack = as_int(m["stack"], "stack");
    p.phi_dc = m["dc"], p.phi_design = m["design_dc"], p.j_port = m["jp"], p.j_center = m["jc"];
    p.amplitude = m["amp"], p.f_mod = m["fm"], p.theta = rad(m["theta"]), p.margin = m["margin"];
    return circulator_template(p);
  }
  AmplifierParams p;
  p.f_center = m["f0"], p.bandwidth = m["bw"], p.z0 = m["z0"], p.i_c = m["ic"];
  p.n_stack = as_int(m["stack"], "stack"), p.phi_dc = m["dc"], p.f_base = m["fbase"];
  p.lf_amplitude = m["lfamp"], p.lf_harmonic = as_int(m["lfharm"], "lfharm"), p.lf_step = rad(m["lfstep"]);
  p.pump_amplitude = m["pumpamp"], p.pump_frequency = m["fpump"], p.pump_phase = rad(m["pumpphase"]);
  p.margin = m["margin"];
  return amplifier_template(p);
}

}  // namespace fluxmod
