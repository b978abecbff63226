#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrhoc/observer.hpp"
#include "rrhoc/synthesis.hpp"

namespace rrhoc {

struct BatteryOptions {
  int scenario_count = 20;
  double amplitude = 1.0;
  /// Disturbance support as a fraction of the schedule horizon.
  double support_fraction = 0.4;
  /// Piece length of the piecewise-constant scenarios; keep it a
  /// multiple of the simulation dt.
  double piece_step = 0.1;
  std::uint64_t seed = 1;
};

/// Deterministic scenario list: one undisturbed run (stability clause),
/// a few canonical shapes, then seeded random piecewise scenarios up to
/// scenario_count. All randomness derives from options.seed.
std::vector<NetworkDisturbance> make_battery(const NetworkModel& model,
                                             const SamplingSchedule& schedule,
                                             const BatteryOptions& options);

struct ScenarioResult {
  std::string name;
  double cost = 0.0;
  double denominator = 0.0;
  double ratio = 0.0;
  double ratio_bound = 0.0;
  bool ratio_ok = false;
  bool horizon_ok = false;
  double disturbance_energy = 0.0;
};

struct CertificationReport {
  double gamma = 0.0;
  Eigen::MatrixXd initial_weight;
  std::vector<ScenarioResult> scenarios;

  /// Clause (i): observed exponential decay on the undisturbed run.
  double decay_rate = 0.0;
  double final_error_ratio = 0.0;
  bool stability_pass = false;

  /// Clause (ii): every scenario ratio within gamma^2 (1 + tolerance).
  double ratio_tolerance = 0.0;
  bool ratio_pass = false;

  bool horizon_pass = false;
  bool analysis_verified = false;

  /// Advisory trajectory-level dissipation check.
  double lyapunov_max_normalized = 0.0;
  double lyapunov_tolerance = 0.0;
  bool lyapunov_pass = false;
  LyapunovReport lyapunov;

  bool pass = false;
  std::string statement;
};

struct CertifyOptions {
  double dt = 1e-3;
  double ratio_tolerance = 0.05;
  double lyapunov_tolerance = 1e-6;
  /// Check times spread between the startup window and the horizon.
  int lyapunov_check_count = 6;
};

/// Runs the battery through the simulator and judges both clauses of the
/// estimation objective. The battery must contain at least one scenario
/// with zero disturbance energy (and the model a nonzero x0) for the
/// stability clause, and at least one disturbed scenario for the ratio
/// clause. Sampling can only refute the bound, so a passing report states
/// that no violation was found, not that the bound is proven.
CertificationReport certify(const NetworkModel& model,
                            const DirectedGraph& graph,
                            const SamplingSchedule& schedule,
                            const SynthesisResult& synthesis,
                            const std::vector<NetworkDisturbance>& battery,
                            const CertifyOptions& options = {});

} // namespace rrhoc
