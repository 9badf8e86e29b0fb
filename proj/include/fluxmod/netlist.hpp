#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fluxmod/devices.hpp"

namespace fluxmod {

/// Parse a number with an optional SI suffix (f p n u m k M G).  MalformedNumber on failure.
double parse_si(const std::string& text);
/// Shortest text that parses back to exactly `v`.
std::string format_exact(double v);

/// Error raised while parsing; line() is 1-based.
class NetlistError : public Error {
 public:
  NetlistError(ErrorKind k, int line, const std::string& msg)
      : Error(k, "line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct NetPump {
  double amplitude = 0.0;  // flux quanta
  int harmonic = 1;
  double phase_deg = 0.0;
  bool operator==(const NetPump&) const = default;
};

struct NetElement {
  enum class Kind { Cap, Res, Squid, JInv } kind = Kind::Cap;
  std::string name;
  std::string a;
  std::string b;  // empty: ground
  double value = 0.0;  // farads, ohms or siemens
  double ic = 4e-6;
  int stack = 1;
  int sign = 1;  // inverters
  double dc = 0.0;
  std::vector<NetPump> pumps;
  bool operator==(const NetElement&) const = default;
};

struct NetPort {
  int number = 1;
  std::string node;
  double z0 = 50.0;
  bool operator==(const NetPort&) const = default;
};

struct NetGrid {
  double fsig = 0.0;
  double fbase = 0.0;
  int k = 0;
  bool operator==(const NetGrid&) const = default;
};

struct NetTemplate {
  std::string name;
  std::vector<std::pair<std::string, double>> params;  // in written order
  bool operator==(const NetTemplate&) const = default;
};

/// Either an explicit graph or a template invocation, plus optional analysis settings.
struct Netlist {
  std::vector<std::string> nodes;
  std::vector<NetElement> elements;
  std::vector<NetPort> ports;
  std::optional<NetGrid> grid;
  std::optional<NetTemplate> tmpl;
  bool operator==(const Netlist&) const = default;
};

Netlist parse_netlist(const std::string& text);
std::string emit_netlist(const Netlist& n);

/// Device for analysis.  Explicit graphs take f_base and K from GRID (no GRID: unpumped only).
Device to_device(const Netlist& n);

bool is_ground_name(const std::string& s);

}  // namespace fluxmod
