#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fluxmod/devices.hpp"
#include "fluxmod/floquet.hpp"

namespace fluxmod {

/// Figures of merit at harmonic (0,0), in dB.
struct Metrics {
  double il_fwd = 0.0;          // -|S_out,in|
  double iso_rev = 0.0;         // -|S_in,out|
  double rl = 0.0;              // -|S_in,in|
  double gain = 0.0;            // |S_out,in|
  double directionality = 0.0;  // |S_out,in| - |S_in,out|
};

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> n = {"IL_fwd", "ISO_rev", "RL", "gain", "directionality"};
  return n;
}
double metric_value(const Metrics& m, const std::string& name);

/// Where and how a device is evaluated.  Parameter "f" (Hz) in a ParamMap overrides the
/// frequency; frequency <= 0 means the template's bias-tracked band centre.
struct AnalysisSpec {
  double frequency = 0.0;
  double offset = 0.0;  // added to the band centre when frequency <= 0
  int k = 0;            // 0: device default
  CoefficientMode mode = CoefficientMode::Exact;
  int port_in = 0;
  int port_out = 1;
};

/// Full Floquet scattering matrix on `grid`.
FloquetSMatrix device_s(const Device& d, const FrequencyGrid& grid, CoefficientMode mode);

/// Evaluate a prepared device.  Series devices use the chain engine, others the nodal one.
Metrics evaluate_device(const Device& d, double frequency, int k, const AnalysisSpec& a);

/// Template instance at one parameter point.  Extra key "f" fixes the analysis frequency.
Metrics evaluate_template(const std::string& name, const ParamMap& params, const AnalysisSpec& a, int k);

struct Axis {
  std::string name;
  double min = 0.0, max = 0.0;
  int count = 2;
  std::vector<double> values() const;
};

struct SweepSpec {
  std::string template_name;
  ParamMap fixed;
  std::vector<Axis> axes;  // one or two
  std::vector<std::string> metrics = {"IL_fwd", "ISO_rev"};
  AnalysisSpec analysis;
  int jobs = 1;
  bool k_gate = true;
  double k_gate_db = 0.05;
  int k_limit = 0;  // 0: four times the starting K
};

struct SweepTable {
  std::vector<std::string> columns;  // axis names then metric names
  int n_axes = 0;                    // leading columns printed exactly; the rest as dB to 4 places
  std::vector<std::vector<std::optional<double>>> rows;
  int k_used = 0;
  bool k_converged = true;
};

using Table = SweepTable;

SweepTable run_sweep(const SweepSpec& s);

std::string format_number(double v, int decimals);
std::string to_csv(const SweepTable& t);
std::string to_json(const SweepTable& t);

struct ParamBound {
  std::string name;
  double lo = 0.0, hi = 0.0;
};

struct ObjectiveSpec {
  double iso_target = 20.0;
  double penalty = 10.0;      // weight on the isolation shortfall
  double il_floor = -1e300;   // IL below this earns nothing (caps amplifier gain)
  double bandwidth = 0.0;     // optional: also score IL at +-bandwidth/2
  double bandwidth_weight = 0.0;
  bool require_stable = false;  // reject pump settings whose Floquet multipliers leave the unit circle
  std::vector<ParamBound> bounds;
};

struct OptimizeSpec {
  std::string template_name;
  ParamMap fixed;
  ParamMap start;  // inside the bounds; missing names start mid-box
  ObjectiveSpec objective;
  AnalysisSpec analysis;
  int restarts = 3;
  int max_evals = 400;  // per restart
  std::uint64_t seed = 1;
  bool k_gate = true;
  double k_gate_db = 0.05;
};

struct TracePoint {
  int evaluation = 0;
  int restart = 0;
  double objective = 0.0;
  ParamMap params;
};

struct OptimizeResult {
  ParamMap best;
  Metrics metrics;
  double objective = 0.0;
  int evaluations = 0;
  int k_used = 0;
  bool k_converged = true;
  std::vector<TracePoint> trace;  // improvements only
};

/// Bounded Nelder-Mead with restarts on IL + w*max(0, ISO_target - ISO).
OptimizeResult optimize(const OptimizeSpec& s);

/// Generic bounded Nelder-Mead on a box; returns best point and value.
struct NelderMeadResult {
  std::vector<double> x;
  double f = 0.0;
  int evaluations = 0;
};
NelderMeadResult nelder_mead_box(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x0, const std::vector<double>& lo, const std::vector<double>& hi,
                                 int max_evals, double xtol = 1e-6);

}  // namespace fluxmod
