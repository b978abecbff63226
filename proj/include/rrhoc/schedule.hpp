#pragma once

#include <vector>

#include "rrhoc/graph.hpp"

namespace rrhoc {

/// Monotone sequence of sampling instants t_0 = 0 < t_1 < ... < t_M.
///
/// Interval k is the half-open window [t_k, t_{k+1}); polling happens at
/// the left endpoint. The uniform factory keeps the step around so delay
/// bounds stay exact instead of being recovered from floating differences.
class SamplingSchedule {
public:
  /// Instants k*step for k = 0..M with M minimal such that M*step covers
  /// the horizon. Throws unless step > 0 and horizon >= step.
  static SamplingSchedule uniform(double step, double horizon);

  /// Arbitrary instants. Requires times[0] == 0 and strict increase.
  static SamplingSchedule explicit_times(std::vector<double> times);

  const std::vector<double>& times() const { return times_; }
  /// Number of instants, M + 1.
  long count() const { return static_cast<long>(times_.size()); }
  double horizon() const { return times_.back(); }
  bool is_uniform() const { return uniform_; }
  /// Throws if the schedule was built from explicit, non-uniform times.
  double step() const;

  /// t_k for 0 <= k < count().
  double time_at(long k) const;

  /// Largest k with t_k <= t; -1 for t < 0. Values past the horizon clamp
  /// to the last interval.
  long interval_index(double t) const;

  /// Worst-case information age for a node polling p neighbours in
  /// round-robin order: max over admissible k of t_{k+1} - t_{k-p+1}.
  /// Equals p*step on a uniform schedule.
  double node_max_delay(int p) const;

  /// max_i node_max_delay(p_i); equals node_max_delay(max_i p_i) since the
  /// window maximum grows with the window width.
  double network_max_delay(const DirectedGraph& g) const;

private:
  SamplingSchedule(std::vector<double> times, bool uniform, double step);

  std::vector<double> times_;
  bool uniform_ = false;
  double step_ = 0.0;
};

} // namespace rrhoc
