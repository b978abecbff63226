#include "rrhoc/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rrhoc {

SamplingSchedule::SamplingSchedule(std::vector<double> times, bool uniform,
                                   double step)
    : times_(std::move(times)), uniform_(uniform), step_(step) {}

SamplingSchedule SamplingSchedule::uniform(double step, double horizon) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("sampling step must be positive");
  }
  if (!(horizon >= step)) {
    throw std::invalid_argument("horizon must cover at least one interval");
  }
  const long m = static_cast<long>(std::ceil(horizon / step - 1e-9));
  std::vector<double> times(static_cast<size_t>(m) + 1);
  for (long k = 0; k <= m; ++k) {
    times[static_cast<size_t>(k)] = static_cast<double>(k) * step;
  }
  return SamplingSchedule(std::move(times), true, step);
}

SamplingSchedule SamplingSchedule::explicit_times(std::vector<double> times) {
  if (times.size() < 2) {
    throw std::invalid_argument("schedule needs at least two instants");
  }
  if (times.front() != 0.0) {
    throw std::invalid_argument("schedule must start at t = 0");
  }
  for (size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw std::invalid_argument("sampling instants must strictly increase");
    }
  }
  // Detect a uniform grid so step() keeps working on round-tripped data.
  const double h = times[1];
  bool uniform = true;
  for (size_t k = 1; k < times.size(); ++k) {
    if (std::abs(times[k] - static_cast<double>(k) * h) > 1e-12 * (1.0 + h)) {
      uniform = false;
      break;
    }
  }
  return SamplingSchedule(std::move(times), uniform, uniform ? h : 0.0);
}

double SamplingSchedule::step() const {
  if (!uniform_) {
    throw std::logic_error("schedule is not uniform, no single step exists");
  }
  return step_;
}

double SamplingSchedule::time_at(long k) const {
  if (k < 0 || k >= count()) {
    throw std::out_of_range("sampling index " + std::to_string(k) +
                            " outside 0.." + std::to_string(count() - 1));
  }
  return times_[static_cast<size_t>(k)];
}

long SamplingSchedule::interval_index(double t) const {
  if (t < times_.front()) {
    return -1;
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<long>(it - times_.begin()) - 1;
}

double SamplingSchedule::node_max_delay(int p) const {
  if (p < 1) {
    throw std::invalid_argument("delay bound needs at least one neighbour");
  }
  if (uniform_) {
    return static_cast<double>(p) * step_;
  }
  // max over k >= p-1 of t_{k+1} - t_{k-p+1}, k+1 within the schedule.
  const long m = count() - 1;
  if (m < p) {
    throw std::invalid_argument(
        "schedule too short to bound the delay for in-degree " +
        std::to_string(p));
  }
  double worst = 0.0;
  for (long k = p - 1; k + 1 <= m; ++k) {
    worst = std::max(worst,
                     times_[static_cast<size_t>(k + 1)] -
                         times_[static_cast<size_t>(k - p + 1)]);
  }
  return worst;
}

double SamplingSchedule::network_max_delay(const DirectedGraph& g) const {
  if (g.max_in_degree() == 0) {
    return 0.0;
  }
  return node_max_delay(g.max_in_degree());
}

} // namespace rrhoc
