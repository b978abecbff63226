#include "rrhoc/certification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rrhoc {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 step, enough to decorrelate per-scenario streams
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<DisturbanceSignal> zero_noise(const NetworkModel& model) {
  std::vector<DisturbanceSignal> v;
  v.reserve(static_cast<std::size_t>(model.node_count()));
  for (int i = 1; i <= model.node_count(); ++i)
    v.push_back(DisturbanceSignal::zero(model.node(i).m_v()));
  return v;
}

double snap_down(double value, double step) {
  return step * std::floor(value / step + 1e-9);
}

} // namespace

std::vector<NetworkDisturbance> make_battery(const NetworkModel& model,
                                             const SamplingSchedule& schedule,
                                             const BatteryOptions& options) {
  if (options.scenario_count < 1)
    throw std::invalid_argument("battery needs at least one scenario");
  if (options.piece_step <= 0.0)
    throw std::invalid_argument("battery piece_step must be positive");
  if (!(options.support_fraction > 0.0) || options.support_fraction > 1.0)
    throw std::invalid_argument("battery support_fraction must lie in (0, 1]");

  const int m_w = model.plant().m_w();
  const double horizon = schedule.horizon();
  double support = snap_down(options.support_fraction * horizon,
                             options.piece_step);
  if (support < options.piece_step) support = options.piece_step;
  const double amp = options.amplitude;

  std::vector<NetworkDisturbance> battery;
  battery.push_back({"undisturbed", DisturbanceSignal::zero(m_w),
                     zero_noise(model)});

  bool any_noise_channel = false;
  for (int i = 1; i <= model.node_count(); ++i)
    if (model.node(i).m_v() > 0) any_noise_channel = true;
  if (m_w == 0 && !any_noise_channel) return battery; // nothing to excite

  if (m_w > 0) {
    NetworkDisturbance pulse{"pulse_w",
                             DisturbanceSignal::piecewise_constant(
                                 {0.0, support},
                                 Eigen::MatrixXd::Constant(m_w, 1, amp)),
                             zero_noise(model)};
    battery.push_back(std::move(pulse));

    NetworkDisturbance sine{"sine_w",
                            DisturbanceSignal::windowed_sinusoid(
                                Eigen::VectorXd::Constant(m_w, amp),
                                Eigen::VectorXd::Constant(m_w, 0.5),
                                Eigen::VectorXd::Zero(m_w), support),
                            zero_noise(model)};
    battery.push_back(std::move(sine));
  }

  if (any_noise_channel) {
    NetworkDisturbance noisy{"sine_w_noise_v",
                             m_w > 0 ? DisturbanceSignal::windowed_sinusoid(
                                           Eigen::VectorXd::Constant(m_w, amp),
                                           Eigen::VectorXd::Constant(m_w, 0.25),
                                           Eigen::VectorXd::Zero(m_w), support)
                                     : DisturbanceSignal::zero(0),
                             {}};
    noisy.v.reserve(static_cast<std::size_t>(model.node_count()));
    for (int i = 1; i <= model.node_count(); ++i) {
      const int mv = model.node(i).m_v();
      noisy.v.push_back(mv > 0
                            ? DisturbanceSignal::random_piecewise(
                                  mv, 0.5 * amp, options.piece_step, support,
                                  mix_seed(options.seed,
                                           static_cast<std::uint64_t>(i)))
                            : DisturbanceSignal::zero(0));
    }
    battery.push_back(std::move(noisy));
  }

  int index = static_cast<int>(battery.size());
  while (static_cast<int>(battery.size()) < options.scenario_count) {
    std::ostringstream name;
    name << "random_" << index;
    const std::uint64_t base =
        mix_seed(options.seed, 1000 + static_cast<std::uint64_t>(index));
    NetworkDisturbance scenario{
        name.str(),
        m_w > 0 ? DisturbanceSignal::random_piecewise(
                      m_w, amp, options.piece_step, support, base)
                : DisturbanceSignal::zero(0),
        {}};
    scenario.v.reserve(static_cast<std::size_t>(model.node_count()));
    for (int i = 1; i <= model.node_count(); ++i) {
      const int mv = model.node(i).m_v();
      scenario.v.push_back(
          mv > 0 ? DisturbanceSignal::random_piecewise(
                       mv, 0.5 * amp, options.piece_step, support,
                       mix_seed(base, static_cast<std::uint64_t>(i)))
                 : DisturbanceSignal::zero(0));
    }
    battery.push_back(std::move(scenario));
    ++index;
  }
  return battery;
}

CertificationReport certify(const NetworkModel& model,
                            const DirectedGraph& graph,
                            const SamplingSchedule& schedule,
                            const SynthesisResult& synthesis,
                            const std::vector<NetworkDisturbance>& battery,
                            const CertifyOptions& options) {
  if (!synthesis.feasible)
    throw std::invalid_argument("certify needs a feasible synthesis result");
  if (battery.empty())
    throw std::invalid_argument("certify needs a nonempty battery");
  if (!(options.dt > 0.0))
    throw std::invalid_argument("certify dt must be positive");
  if (!(options.ratio_tolerance >= 0.0))
    throw std::invalid_argument("ratio tolerance must be nonnegative");

  const Eigen::VectorXd x0 = model.plant().initial_state();

  CertificationReport report;
  report.gamma = synthesis.gamma;
  report.initial_weight = synthesis.initial_weight;
  report.ratio_tolerance = options.ratio_tolerance;
  report.lyapunov_tolerance = options.lyapunov_tolerance;
  report.analysis_verified = synthesis.verification.ok;
  const double bound =
      synthesis.gamma * synthesis.gamma * (1.0 + options.ratio_tolerance);

  int stability_index = -1;
  const NetworkDisturbance* first_disturbed = nullptr;
  bool all_ratios_ok = true;
  bool all_horizons_ok = true;

  double tau_max = 0.0;
  for (const NodeCertificates& c : synthesis.certificates)
    tau_max = std::max(tau_max, c.tau);
  const auto check_times = [&]() {
    std::vector<double> times;
    if (options.lyapunov_check_count < 1) return times;
    const double start = snap_down(tau_max, options.dt) + 2.0 * options.dt;
    const double end = 0.5 * schedule.horizon();
    for (int k = 0; k < options.lyapunov_check_count; ++k) {
      const double raw = start + (end - start) * static_cast<double>(k) /
                                     std::max(1, options.lyapunov_check_count -
                                                     1);
      const double snapped = snap_down(raw, options.dt);
      if (times.empty() || snapped > times.back() + 0.5 * options.dt)
        times.push_back(snapped);
    }
    return times;
  }();

  for (const NetworkDisturbance& scenario : battery) {
    SimulationTrace trace = simulate(model, graph, schedule, synthesis.gains,
                                     scenario, options.dt);
    ScenarioResult row;
    row.name = scenario.name;
    row.cost = disagreement_cost(trace, graph);
    row.disturbance_energy = trace.xi_energy;
    row.denominator =
        trace.x0.dot(synthesis.initial_weight * trace.x0) +
        trace.xi_energy / static_cast<double>(graph.node_count());
    row.ratio = performance_ratio(trace, synthesis.initial_weight);
    row.ratio_bound = bound;
    row.ratio_ok = row.ratio <= bound;
    row.horizon_ok = horizon_adequate(trace);
    all_ratios_ok = all_ratios_ok && row.ratio_ok;
    all_horizons_ok = all_horizons_ok && row.horizon_ok;

    if (trace.xi_energy == 0.0 && stability_index < 0 && x0.norm() > 0.0) {
      stability_index = static_cast<int>(report.scenarios.size());
      report.decay_rate = decay_rate_estimate(trace);

      double initial_sum = 0.0;
      double final_sum = 0.0;
      const Eigen::Index last =
          static_cast<Eigen::Index>(trace.t.size()) - 1;
      for (int i = 0; i < graph.node_count(); ++i) {
        initial_sum += trace.e[static_cast<std::size_t>(i)].col(0).norm();
        final_sum += trace.e[static_cast<std::size_t>(i)].col(last).norm();
      }
      report.final_error_ratio =
          initial_sum > 0.0 ? final_sum / initial_sum
                            : std::numeric_limits<double>::infinity();

      if (!check_times.empty()) {
        report.lyapunov = lyapunov_diagnostic(trace, synthesis.certificates,
                                              synthesis.gamma, check_times);
      }
    } else if (trace.xi_energy > 0.0 && first_disturbed == nullptr) {
      first_disturbed = &scenario;
    }
    report.scenarios.push_back(std::move(row));
  }

  if (stability_index < 0)
    throw std::invalid_argument(
        "battery lacks an undisturbed scenario with nonzero x0; the decay "
        "clause cannot be observed");
  if (first_disturbed == nullptr)
    throw std::invalid_argument(
        "battery lacks a disturbed scenario; the gain clause cannot be "
        "exercised");

  // The undisturbed run never exercises the disturbance supply term, so
  // the dissipation check also runs on one disturbed trace.
  if (!check_times.empty()) {
    SimulationTrace trace = simulate(model, graph, schedule, synthesis.gains,
                                     *first_disturbed, options.dt);
    LyapunovReport disturbed = lyapunov_diagnostic(
        trace, synthesis.certificates, synthesis.gamma, check_times);
    report.lyapunov.max_normalized = std::max(
        report.lyapunov.max_normalized, disturbed.max_normalized);
    report.lyapunov.samples.insert(report.lyapunov.samples.end(),
                                   disturbed.samples.begin(),
                                   disturbed.samples.end());
  }
  report.lyapunov_max_normalized = report.lyapunov.max_normalized;
  report.lyapunov_pass =
      report.lyapunov.max_normalized <= options.lyapunov_tolerance;

  report.stability_pass = report.decay_rate > 0.0;
  report.ratio_pass = all_ratios_ok;
  report.horizon_pass = all_horizons_ok;
  report.pass = report.stability_pass && report.ratio_pass &&
                report.horizon_pass && report.analysis_verified;

  std::ostringstream statement;
  if (report.pass) {
    statement << "no violation found over battery of " << battery.size()
              << " scenarios; sampling cannot prove the bound, only fail to "
                 "refute it";
  } else {
    statement << "certification failed:";
    if (!report.stability_pass) statement << " no observed decay;";
    if (!report.ratio_pass) statement << " ratio bound violated;";
    if (!report.horizon_pass) statement << " horizon inadequate;";
    if (!report.analysis_verified) statement << " LMI re-check failed;";
  }
  report.statement = statement.str();
  return report;
}

} // namespace rrhoc
