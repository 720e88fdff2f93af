#ifndef POLYOBS_SIMULATION_HPP
#define POLYOBS_SIMULATION_HPP

#include <optional>
#include <string>
#include <vector>

#include "polyobs/observer_core.hpp"
#include "polyobs/scenario.hpp"
#include "polyobs/set_geometry.hpp"

namespace polyobs {

/// True-system samples on the scenario grid. w, v and u hold the signal
/// values at each grid time.
struct TrueTrajectory {
  std::vector<double> t;
  std::vector<VectorXd> x, y, w, v, u;

  std::size_t size() const { return t.size(); }
};

/// Signal vectors of a scenario at time t.
VectorXd eval_w(const Scenario& sc, double t);
VectorXd eval_v(const Scenario& sc, double t);
VectorXd eval_u(const Scenario& sc, double t);

/// DT iterates the state equation exactly; CT takes RK4 steps with the
/// signals sampled at the stage times.
TrueTrajectory simulate_true(const Scenario& sc);

struct SampleRecord {
  double t = 0;
  FramerState framer;
  IntervalBox box;
  double eps_norm = 0;
  double iss = 0;
  double box_volume = 0;
  std::optional<VolumeEstimate> poly_volume;
  double membership_slack = 0;  // min(k - H x_true), negative when outside
};

struct ProjectionRecord {
  double t = 0;
  std::size_t sample = 0;
  Polygon2D polygon;
  long mc_inside = 0;
  long mc_escaped = 0;
};

struct RunOptions {
  bool enforce_enclosure = true;
  double enclosure_tol = 1e-6;
  bool enforce_iss = false;
  double iss_tol = 1e-6;
  bool volumes = true;
  bool projections = true;
  /// MC containment of the polytope in the box at every sample, not only at
  /// projection times.
  bool containment_every_sample = false;
  std::optional<TransformPair> transform;
};

struct RunArtifacts {
  std::string scenario_name;
  std::string scenario_hash;
  TransformPair transform;
  EmbeddingDynamics dynamics;
  TrueTrajectory truth;
  std::vector<SampleRecord> samples;
  std::vector<ProjectionRecord> projections;
  double eps0_norm = 0;
  double min_membership_slack = 0;
  double max_iss_excess = 0;  // max(eps_norm - iss), may be negative
  long containment_checks = 0;
};

/// validate_gain, synthesize_transform, build_embedding, then co-simulation of
/// the true system and the embedding on one grid. Throws EnclosureViolation
/// when the true state leaves the polytope (or the polytope leaves the box)
/// and IssViolation when enforce_iss is set and the envelope is exceeded.
RunArtifacts run_scenario(const Scenario& sc, const RunOptions& opt = {});

/// Writes framers.csv, true.csv, volumes.csv, projection_<t>.csv and
/// manifest.txt into dir, returning the file names written.
std::vector<std::string> write_outputs(const RunArtifacts& a, const std::string& dir);

}  // namespace polyobs

#endif  // POLYOBS_SIMULATION_HPP
