#include "fluxmod/mna.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace fluxmod {

const char* to_string(ElementKind k) {
  switch (k) {
    case ElementKind::Capacitor: return "capacitor";
    case ElementKind::Resistor: return "resistor";
    case ElementKind::Inductor: return "inductor";
    case ElementKind::Squid: return "squid";
    case ElementKind::JInverter: return "jinverter";
  }
  return "?";
}

int DeviceGraph::add_node(const std::string& name) {
  if (index_.count(name)) throw Error(ErrorKind::DuplicateName, "node '" + name + "' already defined");
  index_[name] = int(nodes_.size());
  nodes_.push_back(name);
  return int(nodes_.size()) - 1;
}

int DeviceGraph::node(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::UnresolvedNodeRef, "unknown node '" + name + "'");
  return it->second;
}

void DeviceGraph::add(Element e) {
  for (const auto& x : elements_)
    if (!e.name.empty() && x.name == e.name)
      throw Error(ErrorKind::DuplicateName, "element '" + e.name + "' already defined");
  elements_.push_back(std::move(e));
}

void DeviceGraph::add_capacitor(const std::string& name, int a, double c, int b) {
  Element e;
  e.kind = ElementKind::Capacitor, e.name = name, e.a = a, e.b = b, e.value = c;
  add(std::move(e));
}

void DeviceGraph::add_resistor(const std::string& name, int a, double r, int b) {
  Element e;
  e.kind = ElementKind::Resistor, e.name = name, e.a = a, e.b = b, e.value = r;
  add(std::move(e));
}

void DeviceGraph::add_inductor(const std::string& name, int a, double l, int b) {
  Element e;
  e.kind = ElementKind::Inductor, e.name = name, e.a = a, e.b = b, e.value = l;
  add(std::move(e));
}

void DeviceGraph::add_squid(const std::string& name, int a, const SquidSpec& s, int b) {
  Element e;
  e.kind = ElementKind::Squid, e.name = name, e.a = a, e.b = b, e.squid = s;
  add(std::move(e));
}

void DeviceGraph::add_jinverter(const std::string& name, int a, int b, double j, int sign) {
  Element e;
  e.kind = ElementKind::JInverter, e.name = name, e.a = a, e.b = b, e.value = j, e.sign = sign;
  add(std::move(e));
}

void DeviceGraph::add_port(int node, double z0) { ports_.push_back({node, z0}); }

void DeviceGraph::validate() const {
  const int n = node_count();
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "device has no nodes");
  auto check_node = [&](int x, const std::string& who, bool allow_ground) {
    if (x == kGround && allow_ground) return;
    if (x < 0 || x >= n) throw Error(ErrorKind::UnresolvedNodeRef, who + " references a missing node");
  };

  // union-find; index n stands for ground
  std::vector<int> parent(n + 1);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto unite = [&](int x, int y) { parent[find(x)] = find(y); };
  auto id = [&](int x) { return x == kGround ? n : x; };

  std::vector<bool> touched(n, false);
  for (const auto& e : elements_) {
    const bool inv = e.kind == ElementKind::JInverter;
    check_node(e.a, e.name, false);
    check_node(e.b, e.name, !inv);
    if (e.a == e.b) throw Error(ErrorKind::InvalidArgument, e.name + " has both terminals on one node");
    switch (e.kind) {
      case ElementKind::Resistor:
        if (!(e.value > 0)) throw Error(ErrorKind::NonPositiveResistance, e.name + ": resistance must be > 0");
        break;
      case ElementKind::JInverter:
        if (!(e.value > 0)) throw Error(ErrorKind::NonPositiveJ, e.name + ": J must be > 0");
        break;
      case ElementKind::Inductor:
        if (!(e.value > 0)) throw Error(ErrorKind::InvalidArgument, e.name + ": inductance must be > 0");
        break;
      case ElementKind::Squid: e.squid.validate(); break;
      case ElementKind::Capacitor: break;
    }
    touched[e.a] = true;
    if (e.b != kGround) touched[e.b] = true;
    unite(id(e.a), id(e.b));
  }

  std::set<int> port_nodes;
  for (const auto& p : ports_) {
    check_node(p.node, "port", false);
    if (!(p.z0 > 0)) throw Error(ErrorKind::InvalidArgument, "port impedance must be > 0");
    if (!port_nodes.insert(p.node).second) throw Error(ErrorKind::InvalidArgument, "two ports share a node");
    touched[p.node] = true;
    unite(p.node, n);  // a port is a termination to ground
  }

  for (int i = 0; i < n; ++i) {
    if (!touched[i]) throw Error(ErrorKind::DanglingNode, "node '" + nodes_[i] + "' has no connections");
    if (find(i) != find(n)) throw Error(ErrorKind::DanglingNode, "node '" + nodes_[i] + "' is floating");
  }
}

namespace {

void stamp_two_terminal(SpectralMatrix& y, int n, int a, int b, const SpectralMatrix& blk) {
  y.block(a * n, a * n, n, n) += blk;
  if (b == kGround) return;
  y.block(b * n, b * n, n, n) += blk;
  y.block(a * n, b * n, n, n) -= blk;
  y.block(b * n, a * n, n, n) -= blk;
}

}  // namespace

SpectralMatrix stamp(const DeviceGraph& device, const FrequencyGrid& grid, const StampOptions& opt) {
  device.validate();
  const int n = grid.size();
  const int nn = device.node_count();
  SpectralMatrix y = SpectralMatrix::Zero(nn * n, nn * n);
  CoefficientOptions co;
  co.p_max = 2 * grid.k_max();

  for (const auto& e : device.elements()) {
    switch (e.kind) {
      case ElementKind::Capacitor:
        stamp_two_terminal(y, n, e.a, e.b, capacitor_spectral_admittance(e.value, grid));
        break;
      case ElementKind::Resistor:
        stamp_two_terminal(y, n, e.a, e.b, resistor_spectral_admittance(e.value, grid));
        break;
      case ElementKind::Inductor:
        stamp_two_terminal(y, n, e.a, e.b, inductor_spectral_admittance(e.value, grid));
        break;
      case ElementKind::Squid:
        stamp_two_terminal(y, n, e.a, e.b,
                           squid_spectral_admittance(inverse_inductance_coefficients(e.squid, opt.mode, co), grid));
        break;
      case ElementKind::JInverter: {
        // reciprocal inverter: Y_ab = Y_ba = sign * j J
        const cdouble g(0, e.sign * e.value);
        for (int i = 0; i < n; ++i) {
          y(e.a * n + i, e.b * n + i) += g;
          y(e.b * n + i, e.a * n + i) += g;
        }
        break;
      }
    }
  }
  return y;
}

SpectralMatrix port_admittance(const DeviceGraph& device, const FrequencyGrid& grid, const StampOptions& opt) {
  const SpectralMatrix y = stamp(device, grid, opt);
  const int n = grid.size();
  const int nn = device.node_count();
  const auto& ports = device.ports();
  if (ports.empty()) throw Error(ErrorKind::InvalidArgument, "device has no ports");

  std::vector<int> is_port(nn, -1);
  for (std::size_t p = 0; p < ports.size(); ++p) is_port[ports[p].node] = int(p);
  std::vector<int> internal;
  for (int i = 0; i < nn; ++i)
    if (is_port[i] < 0) internal.push_back(i);

  const int np = int(ports.size()), ni = int(internal.size());
  auto gather = [&](const std::vector<int>& rows, const std::vector<int>& cols) {
    SpectralMatrix m(rows.size() * n, cols.size() * n);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < cols.size(); ++c) m.block(r * n, c * n, n, n) = y.block(rows[r] * n, cols[c] * n, n, n);
    return m;
  };
  std::vector<int> pn(np);
  for (int p = 0; p < np; ++p) pn[p] = ports[p].node;

  SpectralMatrix ypp = gather(pn, pn);
  if (ni == 0) return ypp;
  const SpectralMatrix yii = gather(internal, internal);
  const SpectralMatrix yip = gather(internal, pn);
  const SpectralMatrix ypi = gather(pn, internal);
  return ypp - ypi * block_solve(yii, yip);
}

FloquetSMatrix solve_floquet_s(const DeviceGraph& device, const FrequencyGrid& grid, const StampOptions& opt) {
  SpectralMatrix y = stamp(device, grid, opt);
  const int n = grid.size();
  const auto& ports = device.ports();
  const int np = int(ports.size());
  if (np == 0) throw Error(ErrorKind::InvalidArgument, "device has no ports");

  // Terminate every port in z0 and drive it with a Norton source of unit incident wave.
  // V = Yt^-1 * (2/sqrt z0) e,  b = V/sqrt z0 - a,  so  S = 2 Z^-1/2 [Yt^-1]_pp Z^-1/2 - I.
  SpectralMatrix drive = SpectralMatrix::Zero(y.rows(), np * n);
  for (int p = 0; p < np; ++p) {
    const int base = ports[p].node * n;
    y.block(base, base, n, n).diagonal().array() += 1.0 / ports[p].z0;
    drive.block(base, p * n, n, n).diagonal().setConstant(2.0 / std::sqrt(ports[p].z0));
  }
  const SpectralMatrix v = block_solve(y, drive);

  FloquetSMatrix s(np, grid);
  for (int q = 0; q < np; ++q) {
    const double scale = 1.0 / std::sqrt(ports[q].z0);
    s.matrix().middleRows(q * n, n) = v.middleRows(ports[q].node * n, n) * scale;
  }
  s.matrix() -= SpectralMatrix::Identity(np * n, np * n);
  return s;
}

}  // namespace fluxmod
