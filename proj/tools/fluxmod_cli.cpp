#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fluxmod/analysis.hpp"
#include "fluxmod/netlist.hpp"

using namespace fluxmod;

namespace {

struct Globals {
  std::string mode;
  int k = 0;
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 1;
  int jobs = 1;
};

std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, sep);) out.push_back(part);
  return out;
}

std::pair<std::string, std::string> key_value(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw Error(ErrorKind::InvalidArgument, "expected key=value, got '" + s + "'");
  return {lower(s.substr(0, eq)), s.substr(eq + 1)};
}

ParamMap param_map(const std::vector<std::string>& kvs) {
  ParamMap p;
  for (const auto& s : kvs) {
    auto [k, v] = key_value(s);
    p[k] = parse_si(v);
  }
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A template name or a netlist path.
Device load_device(const std::string& source, const std::vector<std::string>& sets) {
  if (is_template(lower(source))) return make_template(lower(source), param_map(sets));
  if (!sets.empty()) throw Error(ErrorKind::InvalidArgument, "--set applies to templates only");
  return to_device(parse_netlist(read_file(source)));
}

CoefficientMode mode_for(const Globals& g, const Device& d) {
  return g.mode.empty() ? d.mode_default : parse_mode(g.mode);
}

void emit(const Globals& g, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(g.out, std::ios::binary);
  if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write '" + g.out + "'");
  f << text;
}

void emit_table(const Globals& g, const Table& t) { emit(g, g.format == "json" ? to_json(t) : to_csv(t)); }

std::pair<int, int> port_pair(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw Error(ErrorKind::InvalidArgument, "expected --ports <in>,<out>");
  return {int(parse_si(parts[0])) - 1, int(parse_si(parts[1])) - 1};
}

double analysis_f(const std::string& s) { return s.empty() || lower(s) == "center" ? 0.0 : parse_si(s); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Floquet analysis of flux-modulated superconducting networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--mode", g.mode, "coefficient mode: taylor3 or exact")->check(CLI::IsMember({"taylor3", "exact"}));
  app.add_option("--k", g.k, "harmonic truncation K (0: device default)")->check(CLI::NonNegativeNumber);
  app.add_option("--out", g.out, "write data to this file instead of stdout");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--seed", g.seed, "optimizer restart seed");
  app.add_option("--jobs", g.jobs, "sweep worker threads")->check(CLI::PositiveNumber);

  // analyze
  std::string a_src, a_fstart, a_fstop;
  std::vector<std::string> a_set;
  int a_points = 101;
  auto* analyze = app.add_subcommand("analyze", "S parameters at harmonic 0 versus frequency");
  analyze->add_option("source", a_src, "template name or netlist file")->required();
  analyze->add_option("--set", a_set, "template parameter key=value");
  analyze->add_option("--fstart", a_fstart, "first frequency (default centre - 1 GHz)");
  analyze->add_option("--fstop", a_fstop, "last frequency (default centre + 1 GHz)");
  analyze->add_option("--points", a_points, "number of frequencies")->check(CLI::PositiveNumber);

  // spectrum
  std::string sp_src, sp_f;
  std::vector<std::string> sp_set;
  std::vector<int> sp_in;
  auto* spectrum = app.add_subcommand("spectrum", "output power per harmonic and port for one drive frequency");
  spectrum->add_option("source", sp_src, "template name or netlist file")->required();
  spectrum->add_option("--set", sp_set, "template parameter key=value");
  spectrum->add_option("--f", sp_f, "drive frequency (default: band centre)");
  spectrum->add_option("--in", sp_in, "driven ports, 1-based (default: all)");

  // sweep
  std::string sw_tmpl, sw_f, sw_ports = "1,2", sw_metrics = "IL_fwd,ISO_rev";
  std::vector<std::string> sw_set, sw_axes;
  double sw_offset = 0.0;
  bool sw_no_gate = false;
  auto* sweep = app.add_subcommand("sweep", "metric table over one or two template parameters");
  sweep->add_option("template", sw_tmpl, "template name")->required();
  sweep->add_option("--axis", sw_axes, "name=min:max:count (one or two)")->required();
  sweep->add_option("--set", sw_set, "fixed template parameter key=value");
  sweep->add_option("--metrics", sw_metrics, "comma list of IL_fwd,ISO_rev,RL,gain,directionality");
  sweep->add_option("--f", sw_f, "analysis frequency, or 'center' to follow the band centre");
  sweep->add_option("--offset", sw_offset, "offset from the band centre in Hz");
  sweep->add_option("--ports", sw_ports, "input,output port (1-based)");
  sweep->add_flag("--no-k-gate", sw_no_gate, "skip the truncation convergence check");

  // optimize
  std::string op_tmpl, op_f, op_ports = "1,2";
  std::vector<std::string> op_set, op_bounds, op_start;
  ObjectiveSpec obj;
  std::string op_floor;
  int op_restarts = 3, op_evals = 300;
  bool op_trace = false;
  auto* opt = app.add_subcommand("optimize", "bounded Nelder-Mead on insertion loss with an isolation target");
  opt->add_option("template", op_tmpl, "template name")->required();
  opt->add_option("--bound", op_bounds, "name=lo:hi")->required();
  opt->add_option("--start", op_start, "starting value key=value");
  opt->add_option("--set", op_set, "fixed template parameter key=value");
  opt->add_option("--iso-target", obj.iso_target, "isolation target in dB");
  opt->add_option("--penalty", obj.penalty, "weight on the isolation shortfall");
  opt->add_option("--il-floor", op_floor, "insertion loss below this earns nothing (dB)");
  opt->add_option("--bandwidth", obj.bandwidth, "also score insertion loss at +-bandwidth/2 (Hz)");
  opt->add_option("--bandwidth-weight", obj.bandwidth_weight, "weight of the band-edge term");
  opt->add_option("--restarts", op_restarts, "number of starts")->check(CLI::PositiveNumber);
  opt->add_option("--max-evals", op_evals, "evaluations per start")->check(CLI::PositiveNumber);
  opt->add_option("--f", op_f, "analysis frequency, or 'center'");
  opt->add_option("--ports", op_ports, "input,output port (1-based)");
  opt->add_flag("--require-stable", obj.require_stable, "reject pump settings that are not small-signal stable");
  opt->add_flag("--trace", op_trace, "emit the improvement trace instead of the optimum");

  // oracle
  std::string or_src, or_f;
  std::vector<std::string> or_set;
  std::vector<int> or_in;
  OracleOptions or_opt;
  bool or_as_given = false;
  auto* oracle = app.add_subcommand("oracle", "spectral solution against time-domain integration");
  oracle->add_option("source", or_src, "template name or netlist file")->required();
  oracle->add_option("--set", or_set, "template parameter key=value");
  oracle->add_option("--f", or_f, "signal frequency (default: band centre)");
  oracle->add_option("--in", or_in, "driven ports, 1-based (default: all)");
  oracle->add_option("--floor-db", or_opt.floor_db, "ignore entries below this level");
  oracle->add_option("--tolerance-db", or_opt.tolerance_db, "pass threshold");
  oracle->add_flag("--as-given", or_as_given, "integrate the network as given instead of its capacitive realization");

  auto* templates = app.add_subcommand("templates", "list device templates and their parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*analyze) {
      const Device d = load_device(a_src, a_set);
      const double fc = d.f_center > 0 ? d.f_center : 6e9;
      const double lo = a_fstart.empty() ? fc - 1e9 : parse_si(a_fstart);
      const double hi = a_fstop.empty() ? fc + 1e9 : parse_si(a_fstop);
      Table t = frequency_response(d, linspace(lo, hi, a_points), g.k, mode_for(g, d));
      t.k_used = g.k > 0 ? g.k : d.k_default;
      emit_table(g, t);
    } else if (*spectrum) {
      const Device d = load_device(sp_src, sp_set);
      const int np = int(d.series ? 2 : d.graph.ports().size());
      std::vector<int> in;
      for (int p : sp_in) in.push_back(p - 1);
      if (in.empty())
        for (int p = 0; p < np; ++p) in.push_back(p);
      const double f = sp_f.empty() ? d.f_center : parse_si(sp_f);
      Table t = spectrum_table(output_spectrum(d, f, g.k, mode_for(g, d), in), np);
      t.k_used = g.k > 0 ? g.k : d.k_default;
      emit_table(g, t);
    } else if (*sweep) {
      SweepSpec s;
      s.template_name = lower(sw_tmpl);
      s.fixed = param_map(sw_set);
      for (const auto& a : sw_axes) {
        auto [name, range] = key_value(a);
        const auto r = split(range, ':');
        if (r.size() != 3) throw Error(ErrorKind::InvalidArgument, "axis '" + a + "' must be name=min:max:count");
        s.axes.push_back({name, parse_si(r[0]), parse_si(r[1]), int(parse_si(r[2]))});
      }
      s.metrics = split(sw_metrics, ',');
      s.analysis.frequency = analysis_f(sw_f);
      s.analysis.offset = sw_offset;
      s.analysis.k = g.k;
      s.analysis.mode = g.mode.empty() ? CoefficientMode::Exact : parse_mode(g.mode);
      std::tie(s.analysis.port_in, s.analysis.port_out) = port_pair(sw_ports);
      s.jobs = g.jobs;
      s.k_gate = !sw_no_gate;
      const Table t = run_sweep(s);
      if (!t.k_converged) std::cerr << "warning: truncation not converged at K=" << t.k_used << "\n";
      emit_table(g, t);
    } else if (*opt) {
      OptimizeSpec s;
      s.template_name = lower(op_tmpl);
      s.fixed = param_map(op_set);
      s.start = param_map(op_start);
      s.objective = obj;
      if (!op_floor.empty()) s.objective.il_floor = parse_si(op_floor);
      for (const auto& b : op_bounds) {
        auto [name, range] = key_value(b);
        const auto r = split(range, ':');
        if (r.size() != 2) throw Error(ErrorKind::InvalidArgument, "bound '" + b + "' must be name=lo:hi");
        s.objective.bounds.push_back({name, parse_si(r[0]), parse_si(r[1])});
      }
      s.analysis.frequency = analysis_f(op_f);
      s.analysis.k = g.k;
      s.analysis.mode = g.mode.empty() ? CoefficientMode::Exact : parse_mode(g.mode);
      std::tie(s.analysis.port_in, s.analysis.port_out) = port_pair(op_ports);
      s.restarts = op_restarts;
      s.max_evals = op_evals;
      s.seed = g.seed;
      const OptimizeResult r = optimize(s);
      Table t;
      if (op_trace) {
        t.columns = {"evaluation", "restart"};
        for (const auto& b : s.objective.bounds) t.columns.push_back(b.name);
        t.n_axes = int(t.columns.size());
        t.columns.push_back("objective");
        for (const auto& p : r.trace) {
          std::vector<std::optional<double>> row{double(p.evaluation), double(p.restart)};
          for (const auto& b : s.objective.bounds) row.push_back(p.params.at(b.name));
          row.push_back(p.objective);
          t.rows.push_back(std::move(row));
        }
      } else {
        for (const auto& b : s.objective.bounds) t.columns.push_back(b.name);
        t.n_axes = int(t.columns.size());
        std::vector<std::optional<double>> row;
        for (const auto& b : s.objective.bounds) row.push_back(r.best.at(b.name));
        for (const auto& m : metric_names()) {
          t.columns.push_back(m);
          row.push_back(metric_value(r.metrics, m));
        }
        t.columns.push_back("objective");
        row.push_back(r.objective);
        t.rows.push_back(std::move(row));
      }
      t.k_used = r.k_used;
      t.k_converged = r.k_converged;
      std::cerr << "optimize: " << r.evaluations << " evaluations, K=" << r.k_used << "\n";
      emit_table(g, t);
    } else if (*oracle) {
      const Device d = load_device(or_src, or_set);
      for (int p : or_in) or_opt.input_ports.push_back(p - 1);
      or_opt.pi_realize = !or_as_given;
      const double f = or_f.empty() ? d.f_center : parse_si(or_f);
      const int k = g.k > 0 ? g.k : std::min(d.k_default, 8);
      const OracleReport r = oracle_compare(d, f, k, or_opt);
      Table t = oracle_table(r);
      t.k_used = k;
      std::cerr << "oracle: " << r.realization << ", max error " << format_number(r.max_error_db, 4) << " dB, "
                << (r.pass ? "pass" : "FAIL") << "\n";
      emit_table(g, t);
    } else if (*templates) {
      const auto rows = template_rows();
      if (g.format == "json") {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& info : template_catalog()) {
          nlohmann::ordered_json o;
          o["template"] = info.name;
          o["summary"] = info.summary;
          nlohmann::ordered_json params = nlohmann::ordered_json::object();
          for (const auto& [k, v] : info.defaults) params[k] = v;
          o["defaults"] = params;
          arr.push_back(o);
        }
        emit(g, arr.dump(2) + "\n");
      } else {
        std::ostringstream os;
        os << "template,parameter,default\n";
        for (const auto& r : rows) os << r.name << "," << r.parameter << "," << format_exact(r.value) << "\n";
        emit(g, os.str());
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_solver_failure() ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
