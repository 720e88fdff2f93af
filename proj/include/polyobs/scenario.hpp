#ifndef POLYOBS_SCENARIO_HPP
#define POLYOBS_SCENARIO_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polyobs/observer_core.hpp"

namespace polyobs {

enum class SignalKind { Constant, Sinusoid, UniformRandom };

/// A scalar signal for one noise or input channel. Sinusoids are
/// amplitude * sin(frequency * t + phase) with frequency in rad per time
/// unit. Uniform random signals are piecewise constant on intervals of length
/// `hold` (0 selects the simulation step) and drawn from the channel bounds.
/// Every value is clamped to the channel bounds.
struct SignalSpec {
  SignalKind kind = SignalKind::Constant;
  double value = 0;
  double amplitude = 0;
  double frequency = 0;
  double phase = 0;
  std::uint64_t seed = 0;
  double hold = 0;

  static SignalSpec constant(double v) { return {SignalKind::Constant, v}; }
  static SignalSpec sinusoid(double amplitude, double frequency, double phase = 0) {
    SignalSpec s;
    s.kind = SignalKind::Sinusoid;
    s.amplitude = amplitude;
    s.frequency = frequency;
    s.phase = phase;
    return s;
  }
  static SignalSpec uniform_random(std::uint64_t seed, double hold = 0) {
    SignalSpec s;
    s.kind = SignalKind::UniformRandom;
    s.seed = seed;
    s.hold = hold;
    return s;
  }

  bool operator==(const SignalSpec&) const = default;
};

double eval_signal(const SignalSpec& s, double t, double lo, double hi, double grid_step);

struct TransformSettings {
  std::vector<int> m_overrides;
  int m_override_all = 0;
  double h_fraction = 0.5;
  int c_max = 256;

  bool operator==(const TransformSettings&) const = default;
};

struct Scenario {
  std::string name;
  SystemModel model;
  MatrixXd L;
  VectorXd x0_true;
  double horizon = 0;  // seconds for CT, steps for DT
  double dt = 1e-3;    // CT only
  std::vector<SignalSpec> w_signals;  // one per process-noise channel
  std::vector<SignalSpec> v_signals;  // one per measurement-noise channel
  std::vector<SignalSpec> u_signals;  // one per input channel
  TransformSettings transform;
  long mc_samples = 10000;
  std::uint64_t mc_seed = 1;
  long mc_stride = 1;  // polytope volume is estimated every mc_stride samples
  int n_dirs = 32;
  std::pair<int, int> projection_dims = {0, 1};  // 0-based
  std::vector<double> projection_times;

  /// Line of each key in the source file, for error messages.
  std::map<std::string, int> key_lines;

  double step() const { return model.domain == TimeDomain::CT ? dt : 1.0; }
  /// Number of simulation steps; samples = steps + 1 unless the horizon is 0.
  long steps() const;
  long samples() const { return horizon > 0 ? steps() + 1 : 0; }

  SynthesisOptions synthesis_options() const;

  /// Throws Validation naming the offending key and its line.
  void validate() const;
};

/// Structural equality over every field except key_lines.
bool same_scenario(const Scenario& a, const Scenario& b);

Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& sc);

/// FNV-1a 64-bit hash of the serialized scenario, as 16 hex digits.
std::string scenario_hash(const Scenario& sc);

}  // namespace polyobs

#endif  // POLYOBS_SCENARIO_HPP
