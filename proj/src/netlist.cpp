#include "fluxmod/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace fluxmod {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double si_multiplier(char c) {
  switch (c) {
    case 'f': return 1e-15;
    case 'p': return 1e-12;
    case 'n': return 1e-9;
    case 'u': return 1e-6;
    case 'm': return 1e-3;
    case 'k': return 1e3;
    case 'M': return 1e6;
    case 'G': return 1e9;
    default: return 0.0;
  }
}

}  // namespace

double parse_si(const std::string& text) {
  if (text.empty()) throw Error(ErrorKind::MalformedNumber, "empty number");
  const char* first = text.data();
  const char* last = first + text.size();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr == first) throw Error(ErrorKind::MalformedNumber, "malformed number '" + text + "'");
  if (ptr != last) {
    const double mul = ptr + 1 == last ? si_multiplier(*ptr) : 0.0;
    if (mul == 0.0) throw Error(ErrorKind::MalformedNumber, "malformed number '" + text + "'");
    v *= mul;
  }
  if (!std::isfinite(v)) throw Error(ErrorKind::MalformedNumber, "number out of range '" + text + "'");
  return v;
}

std::string format_exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, ptr);
}

bool is_ground_name(const std::string& s) { return s == "0" || lower(s) == "gnd"; }

namespace {

struct Parser {
  Netlist net;
  std::set<std::string> node_set;
  std::map<std::string, std::size_t> element_index;
  std::set<int> port_numbers;
  int line = 0;

  [[noreturn]] void fail(ErrorKind k, const std::string& msg) const { throw NetlistError(k, line, msg); }

  double number(const std::string& s) const {
    try {
      return parse_si(s);
    } catch (const Error&) {
      fail(ErrorKind::MalformedNumber, "malformed number '" + s + "'");
    }
  }

  int integer(const std::string& s) const {
    const double v = number(s);
    if (v != std::floor(v) || std::abs(v) > 1e9) fail(ErrorKind::MalformedNumber, "expected an integer, got '" + s + "'");
    return int(v);
  }

  std::string node_ref(const std::string& s) const {
    if (is_ground_name(s)) return "";
    if (!node_set.count(s)) fail(ErrorKind::UnresolvedNodeRef, "unknown node '" + s + "'");
    return s;
  }

  // key=value words after `from`; keys are case-insensitive and must be in `allowed`
  std::map<std::string, std::string> keyvals(const std::vector<std::string>& w, std::size_t from,
                                             const std::set<std::string>& allowed) const {
    std::map<std::string, std::string> out;
    for (std::size_t i = from; i < w.size(); ++i) {
      const auto eq = w[i].find('=');
      if (eq == std::string::npos || eq == 0) fail(ErrorKind::InvalidArgument, "expected key=value, got '" + w[i] + "'");
      const std::string key = lower(w[i].substr(0, eq));
      if (!allowed.empty() && !allowed.count(key)) fail(ErrorKind::InvalidArgument, "unknown key '" + key + "'");
      if (out.count(key)) fail(ErrorKind::DuplicateName, "key '" + key + "' given twice");
      out[key] = w[i].substr(eq + 1);
    }
    return out;
  }

  void need(const std::vector<std::string>& w, std::size_t lo, std::size_t hi, const char* usage) const {
    if (w.size() < lo || w.size() > hi) fail(ErrorKind::InvalidArgument, std::string("usage: ") + usage);
  }

  void add_element(NetElement e) {
    if (element_index.count(e.name)) fail(ErrorKind::DuplicateName, "element '" + e.name + "' already defined");
    element_index[e.name] = net.elements.size();
    net.elements.push_back(std::move(e));
  }

  bool is_keyval(const std::string& s) const { return s.find('=') != std::string::npos; }

  void directive(const std::vector<std::string>& w) {
    const std::string d = lower(w[0]);
    if (d == "node") {
      need(w, 2, 2, "NODE <name>");
      if (is_ground_name(w[1])) fail(ErrorKind::DuplicateName, "ground is implicit");
      if (!node_set.insert(w[1]).second) fail(ErrorKind::DuplicateName, "node '" + w[1] + "' already defined");
      net.nodes.push_back(w[1]);
    } else if (d == "cap" || d == "res") {
      need(w, 4, 5, d == "cap" ? "CAP <name> <node> [<node>] <farads>" : "RES <name> <node> [<node>] <ohms>");
      NetElement e;
      e.kind = d == "cap" ? NetElement::Kind::Cap : NetElement::Kind::Res;
      e.name = w[1];
      e.a = node_ref(w[2]);
      if (e.a.empty()) fail(ErrorKind::InvalidArgument, "first terminal must not be ground");
      if (w.size() == 5) e.b = node_ref(w[3]);
      e.value = number(w.back());
      add_element(std::move(e));
    } else if (d == "squid") {
      if (w.size() < 3) fail(ErrorKind::InvalidArgument, "usage: SQUID <name> <node> [<node>] ic=<A> stack=<int> dc=<flux>");
      NetElement e;
      e.kind = NetElement::Kind::Squid;
      e.name = w[1];
      e.a = node_ref(w[2]);
      if (e.a.empty()) fail(ErrorKind::InvalidArgument, "first terminal must not be ground");
      std::size_t kv = 3;
      if (w.size() > 3 && !is_keyval(w[3])) e.b = node_ref(w[3]), kv = 4;
      const auto k = keyvals(w, kv, {"ic", "stack", "dc"});
      if (k.count("ic")) e.ic = number(k.at("ic"));
      if (k.count("stack")) e.stack = integer(k.at("stack"));
      if (k.count("dc")) e.dc = number(k.at("dc"));
      add_element(std::move(e));
    } else if (d == "pump") {
      if (w.size() < 2) fail(ErrorKind::InvalidArgument, "usage: PUMP <squid> amp=<flux> harm=<int> phase=<deg>");
      auto it = element_index.find(w[1]);
      if (it == element_index.end() || net.elements[it->second].kind != NetElement::Kind::Squid)
        fail(ErrorKind::UnresolvedNodeRef, "unknown squid '" + w[1] + "'");
      const auto k = keyvals(w, 2, {"amp", "harm", "phase"});
      NetPump p;
      if (k.count("amp")) p.amplitude = number(k.at("amp"));
      if (k.count("harm")) p.harmonic = integer(k.at("harm"));
      if (k.count("phase")) p.phase_deg = number(k.at("phase"));
      net.elements[it->second].pumps.push_back(p);
    } else if (d == "jinv") {
      need(w, 5, 6, "JINV <name> <nodeA> <nodeB> j=<S> [sign=-1]");
      NetElement e;
      e.kind = NetElement::Kind::JInv;
      e.name = w[1];
      e.a = node_ref(w[2]);
      e.b = node_ref(w[3]);
      if (e.a.empty() || e.b.empty()) fail(ErrorKind::InvalidArgument, "an inverter joins two non-ground nodes");
      const auto k = keyvals(w, 4, {"j", "sign"});
      if (!k.count("j")) fail(ErrorKind::InvalidArgument, "JINV needs j=<S>");
      e.value = number(k.at("j"));
      e.sign = k.count("sign") ? integer(k.at("sign")) : 1;
      if (e.sign != 1 && e.sign != -1) fail(ErrorKind::InvalidArgument, "sign must be 1 or -1");
      add_element(std::move(e));
    } else if (d == "port") {
      need(w, 3, 4, "PORT <n> <node> z0=<ohms>");
      NetPort p;
      p.number = integer(w[1]);
      if (p.number < 1) fail(ErrorKind::InvalidArgument, "port numbers start at 1");
      if (!port_numbers.insert(p.number).second)
        fail(ErrorKind::DuplicateName, "port " + std::to_string(p.number) + " already defined");
      p.node = node_ref(w[2]);
      if (p.node.empty()) fail(ErrorKind::InvalidArgument, "a port cannot sit on ground");
      const auto k = keyvals(w, 3, {"z0"});
      if (k.count("z0")) p.z0 = number(k.at("z0"));
      net.ports.push_back(p);
    } else if (d == "grid") {
      if (net.grid) fail(ErrorKind::DuplicateName, "GRID given twice");
      const auto k = keyvals(w, 1, {"fsig", "fbase", "k"});
      NetGrid g;
      if (k.count("fsig")) g.fsig = number(k.at("fsig"));
      if (k.count("fbase")) g.fbase = number(k.at("fbase"));
      if (k.count("k")) g.k = integer(k.at("k"));
      if (g.k < 0) fail(ErrorKind::InvalidArgument, "k must be >= 0");
      net.grid = g;
    } else if (d == "template") {
      if (w.size() < 2) fail(ErrorKind::InvalidArgument, "usage: TEMPLATE <name> key=value...");
      if (net.tmpl) fail(ErrorKind::DuplicateName, "TEMPLATE given twice");
      const std::string name = lower(w[1]);
      if (!is_template(name)) fail(ErrorKind::UnresolvedNodeRef, "unknown template '" + w[1] + "'");
      const ParamMap defaults = template_defaults(name);
      NetTemplate t;
      t.name = name;
      std::set<std::string> seen;
      for (std::size_t i = 2; i < w.size(); ++i) {
        const auto eq = w[i].find('=');
        if (eq == std::string::npos || eq == 0) fail(ErrorKind::InvalidArgument, "expected key=value, got '" + w[i] + "'");
        const std::string key = lower(w[i].substr(0, eq));
        if (!defaults.count(key)) fail(ErrorKind::InvalidArgument, "template " + name + " has no parameter '" + key + "'");
        if (!seen.insert(key).second) fail(ErrorKind::DuplicateName, "key '" + key + "' given twice");
        t.params.emplace_back(key, number(w[i].substr(eq + 1)));
      }
      net.tmpl = std::move(t);
    } else {
      fail(ErrorKind::UnknownDirective, "unknown directive '" + w[0] + "'");
    }
  }
};

}  // namespace

Netlist parse_netlist(const std::string& text) {
  Parser p;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    ++p.line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    std::istringstream ls(raw);
    std::vector<std::string> words;
    for (std::string w; ls >> w;) words.push_back(w);
    if (words.empty()) continue;
    p.directive(words);
  }
  ++p.line;
  if (p.net.tmpl && (!p.net.nodes.empty() || !p.net.elements.empty() || !p.net.ports.empty()))
    p.fail(ErrorKind::InvalidArgument, "TEMPLATE cannot be mixed with explicit elements");
  return p.net;
}

std::string emit_netlist(const Netlist& n) {
  std::ostringstream os;
  auto node = [](const std::string& s) { return s.empty() ? std::string("0") : s; };
  if (n.tmpl) {
    os << "TEMPLATE " << n.tmpl->name;
    for (const auto& [k, v] : n.tmpl->params) os << ' ' << k << '=' << format_exact(v);
    os << '\n';
  }
  for (const auto& s : n.nodes) os << "NODE " << s << '\n';
  for (const auto& e : n.elements) {
    switch (e.kind) {
      case NetElement::Kind::Cap:
      case NetElement::Kind::Res:
        os << (e.kind == NetElement::Kind::Cap ? "CAP " : "RES ") << e.name << ' ' << e.a;
        if (!e.b.empty()) os << ' ' << e.b;
        os << ' ' << format_exact(e.value) << '\n';
        break;
      case NetElement::Kind::Squid:
        os << "SQUID " << e.name << ' ' << e.a;
        if (!e.b.empty()) os << ' ' << e.b;
        os << " ic=" << format_exact(e.ic) << " stack=" << e.stack << " dc=" << format_exact(e.dc) << '\n';
        for (const auto& p : e.pumps)
          os << "PUMP " << e.name << " amp=" << format_exact(p.amplitude) << " harm=" << p.harmonic
             << " phase=" << format_exact(p.phase_deg) << '\n';
        break;
      case NetElement::Kind::JInv:
        os << "JINV " << e.name << ' ' << node(e.a) << ' ' << node(e.b) << " j=" << format_exact(e.value);
        if (e.sign != 1) os << " sign=" << e.sign;
        os << '\n';
        break;
    }
  }
  for (const auto& p : n.ports) os << "PORT " << p.number << ' ' << p.node << " z0=" << format_exact(p.z0) << '\n';
  if (n.grid)
    os << "GRID fsig=" << format_exact(n.grid->fsig) << " fbase=" << format_exact(n.grid->fbase) << " k=" << n.grid->k
       << '\n';
  return os.str();
}

Device to_device(const Netlist& n) {
  if (n.tmpl) {
    ParamMap p;
    for (const auto& [k, v] : n.tmpl->params) p[k] = v;
    Device d = make_template(n.tmpl->name, p);
    if (n.grid) {
      if (n.grid->fbase > 0 && std::abs(n.grid->fbase - d.f_base) > 1e-6 * d.f_base)
        throw Error(ErrorKind::GridMismatch, "GRID fbase differs from the template modulation frequency");
      if (n.grid->k > 0) d.k_default = n.grid->k;
      if (n.grid->fsig != 0) d.f_center = n.grid->fsig;
    }
    return d;
  }

  Device d;
  d.name = "netlist";
  bool pumped = false;
  for (const auto& e : n.elements) pumped |= !e.pumps.empty();
  if (pumped && (!n.grid || !(n.grid->fbase > 0)))
    throw Error(ErrorKind::NonPositiveBase, "a pumped netlist needs GRID fbase=<Hz>");
  d.f_base = n.grid && n.grid->fbase > 0 ? n.grid->fbase : 1e9;
  d.k_default = n.grid ? n.grid->k : 0;
  d.f_center = n.grid ? n.grid->fsig : 0.0;
  d.f_design = d.f_center;

  DeviceGraph& g = d.graph;
  for (const auto& s : n.nodes) g.add_node(s);
  auto id = [&](const std::string& s) { return s.empty() ? kGround : g.node(s); };
  for (const auto& e : n.elements) {
    switch (e.kind) {
      case NetElement::Kind::Cap: g.add_capacitor(e.name, id(e.a), e.value, id(e.b)); break;
      case NetElement::Kind::Res: g.add_resistor(e.name, id(e.a), e.value, id(e.b)); break;
      case NetElement::Kind::JInv: g.add_jinverter(e.name, id(e.a), id(e.b), e.value, e.sign); break;
      case NetElement::Kind::Squid: {
        SquidSpec s;
        s.i_c = e.ic;
        s.n_stack = e.stack;
        s.phi_dc = e.dc;
        for (const auto& p : e.pumps) s.pumps.push_back({p.amplitude, p.harmonic, p.phase_deg * kPi / 180.0});
        g.add_squid(e.name, id(e.a), s, id(e.b));
        break;
      }
    }
  }
  std::vector<NetPort> ports = n.ports;
  std::sort(ports.begin(), ports.end(), [](const NetPort& a, const NetPort& b) { return a.number < b.number; });
  for (std::size_t i = 0; i < ports.size(); ++i) {
    if (ports[i].number != int(i) + 1) throw Error(ErrorKind::InvalidArgument, "ports must be numbered 1..N without gaps");
    g.add_port(g.node(ports[i].node), ports[i].z0);
  }
  g.validate();
  return d;
}

}  // namespace fluxmod
