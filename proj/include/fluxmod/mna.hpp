#pragma once

#include <map>
#include <string>
#include <vector>

#include "fluxmod/elements.hpp"
#include "fluxmod/floquet.hpp"

namespace fluxmod {

enum class ElementKind { Capacitor, Resistor, Inductor, Squid, JInverter };

const char* to_string(ElementKind k);

inline constexpr int kGround = -1;

struct Element {
  ElementKind kind = ElementKind::Capacitor;
  std::string name;
  int a = kGround;
  int b = kGround;     // second terminal; ground for one-ports
  double value = 0.0;  // farads, ohms, henries or siemens
  int sign = 1;        // inverters only
  SquidSpec squid;     // squids only

  bool operator==(const Element&) const = default;
};

struct Port {
  int node = 0;
  double z0 = 50.0;

  bool operator==(const Port&) const = default;
};

/// Nodes, elements and ports of a lumped network.  Ground is implicit.
class DeviceGraph {
 public:
  int add_node(const std::string& name);
  int node(const std::string& name) const;  // throws UnresolvedNodeRef
  bool has_node(const std::string& name) const { return index_.count(name) > 0; }
  int node_count() const { return int(nodes_.size()); }
  const std::vector<std::string>& node_names() const { return nodes_; }

  void add(Element e);
  void add_capacitor(const std::string& name, int a, double c, int b = kGround);
  void add_resistor(const std::string& name, int a, double r, int b = kGround);
  void add_inductor(const std::string& name, int a, double l, int b = kGround);
  void add_squid(const std::string& name, int a, const SquidSpec& s, int b = kGround);
  void add_jinverter(const std::string& name, int a, int b, double j, int sign = 1);
  void add_port(int node, double z0 = 50.0);

  const std::vector<Element>& elements() const { return elements_; }
  std::vector<Element>& elements() { return elements_; }
  const std::vector<Port>& ports() const { return ports_; }

  /// Structural checks on terminals, element values and ports.  Every node must reach a port or ground.
  void validate() const;

  bool operator==(const DeviceGraph&) const = default;

 private:
  std::vector<std::string> nodes_;
  std::map<std::string, int> index_;
  std::vector<Element> elements_;
  std::vector<Port> ports_;
};

struct StampOptions {
  CoefficientMode mode = CoefficientMode::Exact;
};

/// Block nodal admittance matrix (node count * (2K+1) square), ports not terminated.
SpectralMatrix stamp(const DeviceGraph& device, const FrequencyGrid& grid, const StampOptions& opt = {});

/// Port admittance block after eliminating internal nodes.
SpectralMatrix port_admittance(const DeviceGraph& device, const FrequencyGrid& grid, const StampOptions& opt = {});

/// Full Floquet S over all ports and all harmonics.
FloquetSMatrix solve_floquet_s(const DeviceGraph& device, const FrequencyGrid& grid, const StampOptions& opt = {});

/// Waves from node phasors at one port: a = (V + z0 I)/(2 sqrt z0), b = (V - z0 I)/(2 sqrt z0).
inline cdouble incident_wave(cdouble v, cdouble i, double z0) { return (v + z0 * i) / (2.0 * std::sqrt(z0)); }
inline cdouble outgoing_wave(cdouble v, cdouble i, double z0) { return (v - z0 * i) / (2.0 * std::sqrt(z0)); }

}  // namespace fluxmod
