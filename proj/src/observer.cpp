#include "rrhoc/observer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

namespace rrhoc {

namespace {

constexpr double kQuarterPiSq = 2.4674011002723396547086227499689;

struct Derivative {
  Eigen::VectorXd dx;
  std::vector<Eigen::VectorXd> dxhat;
};

} // namespace

SimulationTrace::SimulationTrace(NetworkModel model, DirectedGraph graph,
                                 SamplingSchedule schedule)
    : model_(std::move(model)), graph_(std::move(graph)),
      schedule_(std::move(schedule)) {}

long SimulationTrace::grid_index(double time, double tol) const {
  const auto it = std::lower_bound(t.begin(), t.end(), time - tol);
  if (it == t.end() || std::abs(*it - time) > tol) {
    throw std::invalid_argument("time " + std::to_string(time) +
                                " is not on the simulation grid");
  }
  return static_cast<long>(it - t.begin());
}

SimulationTrace simulate(const NetworkModel& model, const DirectedGraph& graph,
                         const SamplingSchedule& schedule,
                         const std::vector<NodeGains>& gains,
                         const NetworkDisturbance& disturbance, double dt,
                         const Eigen::VectorXd* x0_override) {
  const int n = model.n();
  const int nn = model.node_count();
  if (graph.node_count() != nn) {
    throw std::invalid_argument("graph and model disagree on the node count");
  }
  if (static_cast<int>(gains.size()) != nn) {
    throw std::invalid_argument("need one gain set per node");
  }
  for (int i = 1; i <= nn; ++i) {
    const auto& g = gains[static_cast<size_t>(i - 1)];
    const auto& nd = model.node(i);
    if (g.L.rows() != n || g.L.cols() != nd.r() || g.K.rows() != n ||
        g.K.cols() != nd.l()) {
      throw std::invalid_argument("gain dimensions wrong at node " +
                                  std::to_string(i));
    }
  }
  disturbance.validate_against(model);
  if (!(dt > 0.0)) {
    throw std::invalid_argument("dt must be positive");
  }
  Eigen::VectorXd x0 =
      x0_override ? *x0_override : model.plant().initial_state();
  if (x0.size() != n) {
    throw std::invalid_argument("x0 must have the state dimension");
  }

  const auto& times = schedule.times();
  const long intervals = schedule.count() - 1;
  std::vector<long> steps(static_cast<size_t>(intervals));
  long total = 1;
  for (long k = 0; k < intervals; ++k) {
    const double gap = times[static_cast<size_t>(k + 1)] -
                       times[static_cast<size_t>(k)];
    const long mk = std::llround(gap / dt);
    if (mk < 1 || std::abs(static_cast<double>(mk) * dt - gap) >
                      1e-9 * std::max(1.0, gap)) {
      throw std::invalid_argument(
          "dt does not divide the sampling gap of interval " +
          std::to_string(k));
    }
    steps[static_cast<size_t>(k)] = mk;
    total += mk;
  }

  SimulationTrace tr(model, graph, schedule);
  tr.dt = dt;
  tr.x0 = x0;
  tr.xi_energy = disturbance.stacked_energy();
  tr.t.assign(static_cast<size_t>(total), 0.0);
  tr.x.resize(n, total);
  tr.w.resize(model.m_w(), total);
  tr.xhat.assign(static_cast<size_t>(nn), Eigen::MatrixXd(n, total));
  tr.e = tr.xhat;
  tr.edot = tr.xhat;
  tr.edot_pre = tr.xhat;
  tr.v.resize(static_cast<size_t>(nn));
  for (int i = 1; i <= nn; ++i) {
    tr.v[static_cast<size_t>(i - 1)].resize(model.m_v(i), total);
  }
  tr.buffers.resize(static_cast<size_t>(intervals) + 1);
  tr.polls.assign(static_cast<size_t>(intervals) + 1,
                  std::vector<int>(static_cast<size_t>(nn), 0));

  // Live state.
  Eigen::VectorXd xs = x0;
  std::vector<Eigen::VectorXd> xh(static_cast<size_t>(nn),
                                  Eigen::VectorXd::Zero(n));
  std::vector<std::vector<BufferEntry>> buf(static_cast<size_t>(nn));
  std::vector<Eigen::VectorXd> bufsum(static_cast<size_t>(nn));
  for (int i = 1; i <= nn; ++i) {
    const int p = graph.in_degree(i);
    const int l = model.node(i).l();
    buf[static_cast<size_t>(i - 1)].assign(
        static_cast<size_t>(p), BufferEntry{Eigen::VectorXd::Zero(l), -1.0});
    bufsum[static_cast<size_t>(i - 1)] = Eigen::VectorXd::Zero(l);
  }
  auto refresh_sum = [&](int i) {
    auto& acc = bufsum[static_cast<size_t>(i - 1)];
    acc.setZero();
    for (const auto& entry : buf[static_cast<size_t>(i - 1)]) {
      acc += entry.value;
    }
  };

  const Eigen::MatrixXd& A = model.plant().A;
  const Eigen::MatrixXd& B2 = model.plant().B2;

  auto derivative = [&](double time, const Eigen::VectorXd& xv,
                        const std::vector<Eigen::VectorXd>& xhv,
                        Derivative& out) {
    const Eigen::VectorXd wt = disturbance.w(time);
    out.dx = A * xv + B2 * wt;
    out.dxhat.resize(static_cast<size_t>(nn));
    for (int i = 1; i <= nn; ++i) {
      const auto& nd = model.node(i);
      const auto& g = gains[static_cast<size_t>(i - 1)];
      const Eigen::VectorXd vt =
          disturbance.v[static_cast<size_t>(i - 1)](time);
      const Eigen::VectorXd innovation =
          nd.C * (xv - xhv[static_cast<size_t>(i - 1)]) + nd.D2 * wt +
          nd.Dbar2 * vt;
      out.dxhat[static_cast<size_t>(i - 1)] =
          A * xhv[static_cast<size_t>(i - 1)] + g.L * innovation +
          g.K * bufsum[static_cast<size_t>(i - 1)];
    }
  };

  Derivative d1, d2, d3, d4;
  std::vector<Eigen::VectorXd> stage(static_cast<size_t>(nn));

  auto record_state = [&](long g, double time) {
    tr.t[static_cast<size_t>(g)] = time;
    tr.x.col(g) = xs;
    tr.w.col(g) = disturbance.w(time);
    for (int i = 0; i < nn; ++i) {
      tr.xhat[static_cast<size_t>(i)].col(g) = xh[static_cast<size_t>(i)];
      tr.e[static_cast<size_t>(i)].col(g) = xs - xh[static_cast<size_t>(i)];
      tr.v[static_cast<size_t>(i)].col(g) =
          disturbance.v[static_cast<size_t>(i)](time);
    }
  };
  auto record_edot = [&](long g, double time, bool pre, bool post) {
    derivative(time, xs, xh, d1);
    for (int i = 0; i < nn; ++i) {
      const Eigen::VectorXd ed = d1.dx - d1.dxhat[static_cast<size_t>(i)];
      if (pre) {
        tr.edot_pre[static_cast<size_t>(i)].col(g) = ed;
      }
      if (post) {
        tr.edot[static_cast<size_t>(i)].col(g) = ed;
      }
    }
  };

  long g = 0;
  for (long k = 0; k <= intervals; ++k) {
    const double tk = times[static_cast<size_t>(k)];
    // Left limit of the derivative, with the buffers still holding the
    // previous interval's samples.
    record_edot(g, tk, true, false);

    for (int i = 1; i <= nn; ++i) {
      const auto& neigh = graph.neighborhood(i);
      const int p = static_cast<int>(neigh.size());
      if (p == 0) {
        continue;
      }
      // Front of the shifted neighbourhood at instant k.
      const int slot = static_cast<int>(
          (static_cast<long>(p) - (k % static_cast<long>(p))) %
          static_cast<long>(p));
      const int j = neigh[static_cast<size_t>(slot)];
      buf[static_cast<size_t>(i - 1)][static_cast<size_t>(slot)] = {
          model.node(i).H *
              (xh[static_cast<size_t>(j - 1)] - xh[static_cast<size_t>(i - 1)]),
          tk};
      refresh_sum(i);
      tr.polls[static_cast<size_t>(k)][static_cast<size_t>(i - 1)] = j;
    }
    tr.buffers[static_cast<size_t>(k)] = buf;

    record_state(g, tk);
    record_edot(g, tk, false, true);
    if (k == intervals) {
      break;
    }

    const long mk = steps[static_cast<size_t>(k)];
    for (long s = 1; s <= mk; ++s) {
      const double t0 = tk + static_cast<double>(s - 1) * dt;
      derivative(t0, xs, xh, d1);
      for (int i = 0; i < nn; ++i) {
        stage[static_cast<size_t>(i)] =
            xh[static_cast<size_t>(i)] +
            0.5 * dt * d1.dxhat[static_cast<size_t>(i)];
      }
      derivative(t0 + 0.5 * dt, xs + 0.5 * dt * d1.dx, stage, d2);
      for (int i = 0; i < nn; ++i) {
        stage[static_cast<size_t>(i)] =
            xh[static_cast<size_t>(i)] +
            0.5 * dt * d2.dxhat[static_cast<size_t>(i)];
      }
      derivative(t0 + 0.5 * dt, xs + 0.5 * dt * d2.dx, stage, d3);
      for (int i = 0; i < nn; ++i) {
        stage[static_cast<size_t>(i)] =
            xh[static_cast<size_t>(i)] + dt * d3.dxhat[static_cast<size_t>(i)];
      }
      derivative(t0 + dt, xs + dt * d3.dx, stage, d4);

      xs += dt / 6.0 * (d1.dx + 2.0 * d2.dx + 2.0 * d3.dx + d4.dx);
      for (int i = 0; i < nn; ++i) {
        xh[static_cast<size_t>(i)] +=
            dt / 6.0 *
            (d1.dxhat[static_cast<size_t>(i)] +
             2.0 * d2.dxhat[static_cast<size_t>(i)] +
             2.0 * d3.dxhat[static_cast<size_t>(i)] +
             d4.dxhat[static_cast<size_t>(i)]);
      }

      ++g;
      if (s < mk) {
        const double tg = tk + static_cast<double>(s) * dt;
        record_state(g, tg);
        record_edot(g, tg, true, true);
      }
      // s == mk lands on t_{k+1}, recorded by the next outer iteration.
    }
  }
  return tr;
}

double disagreement_cost(const SimulationTrace& trace,
                         const DirectedGraph& graph) {
  const long total = trace.sample_count();
  if (total < 2) {
    throw std::invalid_argument("trace too short for quadrature");
  }
  const int nn = graph.node_count();
  if (static_cast<int>(trace.e.size()) != nn) {
    throw std::invalid_argument("trace and graph disagree on the node count");
  }
  double acc_direct = 0.0;
  double acc_expanded = 0.0;
  double prev_direct = 0.0;
  double prev_expanded = 0.0;
  double max_gap = 0.0;
  double scale = 1.0;
  for (long g = 0; g < total; ++g) {
    double direct = 0.0;
    double expanded = 0.0;
    double term_scale = 0.0;
    for (int i = 1; i <= nn; ++i) {
      const auto ei = trace.e[static_cast<size_t>(i - 1)].col(g);
      Eigen::VectorXd neigh_sum = Eigen::VectorXd::Zero(ei.size());
      for (int j : graph.neighborhood(i)) {
        const auto ej = trace.e[static_cast<size_t>(j - 1)].col(g);
        direct += (ej - ei).squaredNorm();
        neigh_sum += ej;
      }
      const double degree = static_cast<double>(graph.in_degree(i) +
                                                graph.out_degree(i));
      expanded += degree * ei.squaredNorm() - 2.0 * ei.dot(neigh_sum);
      term_scale += degree * ei.squaredNorm();
    }
    max_gap = std::max(max_gap, std::abs(direct - expanded));
    // the expanded form cancels terms of the order of term_scale, so that
    // is the magnitude rounding error lives on
    scale = std::max({scale, std::abs(direct), term_scale});
    if (g > 0) {
      const double h =
          trace.t[static_cast<size_t>(g)] - trace.t[static_cast<size_t>(g - 1)];
      acc_direct += 0.5 * h * (prev_direct + direct);
      acc_expanded += 0.5 * h * (prev_expanded + expanded);
    }
    prev_direct = direct;
    prev_expanded = expanded;
  }
  // A diverging closed loop overflows both forms; the consistency gate
  // only makes sense on finite data.
  if (std::isfinite(max_gap) && std::isfinite(scale) &&
      max_gap > 1e-9 * scale) {
    throw std::logic_error(
        "disagreement cost forms disagree beyond rounding; trace corrupt");
  }
  (void)acc_expanded;
  return acc_direct / static_cast<double>(nn);
}

double performance_ratio(const SimulationTrace& trace,
                         const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols() || P.rows() != trace.x0.size()) {
    throw std::invalid_argument("P must be n x n");
  }
  if ((P - P.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * std::max(1.0, P.norm())) {
    throw std::invalid_argument("P must be symmetric");
  }
  const double denom =
      trace.x0.dot(P * trace.x0) +
      trace.xi_energy / static_cast<double>(trace.model().node_count());
  if (!(denom > 0.0)) {
    throw std::invalid_argument(
        "performance ratio undefined: x0 = 0 and zero disturbance energy");
  }
  return disagreement_cost(trace, trace.graph()) / denom;
}

double decay_rate_estimate(const SimulationTrace& trace) {
  const long total = trace.sample_count();
  if (total < 4) {
    throw std::invalid_argument("trace too short for a decay fit");
  }
  const long start = total / 2;
  double min_norm = std::numeric_limits<double>::infinity();
  for (long g = start; g < total; ++g) {
    double s = 0.0;
    for (const auto& e : trace.e) {
      s += e.col(g).norm();
    }
    min_norm = std::min(min_norm, s);
  }
  if (min_norm <= 1e-300) {
    return std::numeric_limits<double>::infinity(); // converged
  }
  // Least squares of log s(t) = a + b t over the tail half.
  double sum_t = 0.0, sum_y = 0.0, sum_tt = 0.0, sum_ty = 0.0;
  const double count = static_cast<double>(total - start);
  for (long g = start; g < total; ++g) {
    double s = 0.0;
    for (const auto& e : trace.e) {
      s += e.col(g).norm();
    }
    const double tt = trace.t[static_cast<size_t>(g)];
    const double y = std::log(s);
    sum_t += tt;
    sum_y += y;
    sum_tt += tt * tt;
    sum_ty += tt * y;
  }
  const double denom = count * sum_tt - sum_t * sum_t;
  if (denom <= 0.0) {
    throw std::logic_error("degenerate time grid in decay fit");
  }
  const double slope = (count * sum_ty - sum_t * sum_y) / denom;
  return -slope;
}

bool horizon_adequate(const SimulationTrace& trace) {
  const long total = trace.sample_count();
  if (total < 2) {
    return false;
  }
  const double t_end = trace.t.back();
  const double t_tail = 0.9 * t_end;
  double energy_total = 0.0;
  double energy_tail = 0.0;
  double prev = 0.0;
  for (long g = 0; g < total; ++g) {
    double val = 0.0;
    for (const auto& e : trace.e) {
      val += e.col(g).squaredNorm();
    }
    if (g > 0) {
      const double h =
          trace.t[static_cast<size_t>(g)] - trace.t[static_cast<size_t>(g - 1)];
      const double cell = 0.5 * h * (prev + val);
      energy_total += cell;
      if (trace.t[static_cast<size_t>(g - 1)] >= t_tail) {
        energy_tail += cell;
      }
    }
    prev = val;
  }
  if (energy_total <= 1e-300) {
    return true;
  }
  return energy_tail < 0.01 * energy_total;
}

namespace {

// Trapezoid over grid cells [ga, gb] using right limits at cell starts
// and left limits at cell ends, which is exact bookkeeping for
// integrands that jump at sampling instants.
template <typename FRight, typename FLeft>
double two_sided_trapezoid(const SimulationTrace& trace, long ga, long gb,
                           FRight f_right, FLeft f_left) {
  double acc = 0.0;
  for (long g = ga; g < gb; ++g) {
    const double h =
        trace.t[static_cast<size_t>(g + 1)] - trace.t[static_cast<size_t>(g)];
    acc += 0.5 * h * (f_right(g) + f_left(g + 1));
  }
  return acc;
}

struct FunctionalParts {
  double value = 0.0;
};

// V_i(t) with constant pre-history e = x0, edot = 0 for s <= 0.
double functional_value(const SimulationTrace& trace,
                        const NodeCertificates& c, int node, double time) {
  const long gt = trace.grid_index(time);
  const auto& e = trace.e[static_cast<size_t>(node - 1)];
  const auto& ed = trace.edot[static_cast<size_t>(node - 1)];
  const auto& ed_pre = trace.edot_pre[static_cast<size_t>(node - 1)];
  const double tail = time - c.tau;

  double v = e.col(gt).dot(c.Yhat * e.col(gt));

  long ga = 0;
  if (tail > 1e-12) {
    ga = trace.grid_index(tail);
  } else {
    // Closed-form pre-history piece of the S term; the R term vanishes
    // there because the extension has zero derivative.
    const double a = c.alpha;
    const double pre = (std::exp(-2.0 * a * time) -
                        std::exp(-2.0 * a * c.tau)) /
                       (2.0 * a);
    v += trace.x0.dot(c.S * trace.x0) * pre;
  }

  auto s_term = [&](long g) {
    const double damp =
        std::exp(-2.0 * c.alpha * (time - trace.t[static_cast<size_t>(g)]));
    return damp * e.col(g).dot(c.S * e.col(g));
  };
  v += two_sided_trapezoid(trace, ga, gt, s_term, s_term);

  auto r_weight = [&](long g, const Eigen::MatrixXd& src) {
    const double s = trace.t[static_cast<size_t>(g)];
    const double damp = std::exp(-2.0 * c.alpha * (time - s));
    return damp * (c.tau + s - time) * src.col(g).dot(c.R * src.col(g));
  };
  v += c.tau * two_sided_trapezoid(
                   trace, ga, gt, [&](long g) { return r_weight(g, ed); },
                   [&](long g) { return r_weight(g, ed_pre); });
  return v;
}

} // namespace

LyapunovReport lyapunov_diagnostic(const SimulationTrace& trace,
                                   const std::vector<NodeCertificates>& certs,
                                   double gamma,
                                   const std::vector<double>& check_times) {
  const DirectedGraph& graph = trace.graph();
  const int nn = graph.node_count();
  if (static_cast<int>(certs.size()) != nn) {
    throw std::invalid_argument("need one certificate set per node");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("gamma must be positive");
  }
  if (check_times.empty()) {
    throw std::invalid_argument("need at least one check time");
  }
  const double horizon = trace.t.back();
  const double g2 = gamma * gamma;

  LyapunovReport report;
  report.max_normalized = -std::numeric_limits<double>::infinity();

  for (double time : check_times) {
    const long gt = trace.grid_index(time);
    if (time - trace.dt < -1e-12 || time + trace.dt > horizon + 1e-12) {
      throw std::invalid_argument(
          "check time too close to the trace boundary for the derivative");
    }
    // Functional values of every node are shared by all per-node rows.
    std::vector<double> v_all(static_cast<size_t>(nn));
    for (int j = 1; j <= nn; ++j) {
      v_all[static_cast<size_t>(j - 1)] =
          functional_value(trace, certs[static_cast<size_t>(j - 1)], j, time);
    }
    const long interval = trace.schedule().interval_index(time);

    for (int i = 1; i <= nn; ++i) {
      const auto& c = certs[static_cast<size_t>(i - 1)];
      if (time < c.tau - 1e-12) {
        throw std::invalid_argument("check time " + std::to_string(time) +
                                    " inside the startup window of node " +
                                    std::to_string(i));
      }
      const auto& e = trace.e[static_cast<size_t>(i - 1)];
      const auto& ed = trace.edot[static_cast<size_t>(i - 1)];
      const auto& ed_pre = trace.edot_pre[static_cast<size_t>(i - 1)];
      const Eigen::VectorXd ei = e.col(gt);
      const Eigen::VectorXd edi = ed.col(gt);
      const long g_tau = trace.grid_index(time - c.tau);

      auto r_plain = [&](long g, const Eigen::MatrixXd& src) {
        const double damp = std::exp(
            -2.0 * c.alpha * (time - trace.t[static_cast<size_t>(g)]));
        return damp * src.col(g).dot(c.R * src.col(g));
      };
      const double r_history = two_sided_trapezoid(
          trace, g_tau, gt, [&](long g) { return r_plain(g, ed); },
          [&](long g) { return r_plain(g, ed_pre); });

      const double damp_tau = std::exp(-2.0 * c.alpha * c.tau);
      const Eigen::VectorXd e_del = e.col(g_tau);

      std::vector<double> terms;
      terms.push_back(2.0 * ei.dot(c.Yhat * edi));
      terms.push_back(2.0 * c.alpha * ei.dot(c.Yhat * ei));
      terms.push_back(ei.dot(c.S * ei));
      terms.push_back(-damp_tau * e_del.dot(c.S * e_del));
      terms.push_back(c.tau * c.tau * edi.dot(c.R * edi));
      terms.push_back(-c.tau * r_history);

      double coupled = 0.0;
      for (int j : graph.neighborhood(i)) {
        coupled += certs[static_cast<size_t>(j - 1)].pi *
                   v_all[static_cast<size_t>(j - 1)];
      }
      terms.push_back(-coupled);

      double endow = 0.0;
      for (int j : graph.out_neighbors(i)) {
        const double tj = certs[static_cast<size_t>(j - 1)].tau;
        endow += tj * tj;
      }
      terms.push_back(endow * edi.dot(c.W * edi));

      // Supply consumed from each polled neighbour: the gap between the
      // neighbour's current error and its held sample.
      double supply = 0.0;
      const auto& slots =
          trace.buffers[static_cast<size_t>(interval)][static_cast<size_t>(
              i - 1)];
      const auto& neigh = graph.neighborhood(i);
      for (size_t s = 0; s < neigh.size(); ++s) {
        const int j = neigh[s];
        const auto& cj = certs[static_cast<size_t>(j - 1)];
        const double ts = slots[s].timestamp;
        Eigen::VectorXd sample;
        if (ts < 0.0) {
          sample = trace.x0; // pre-history convention
        } else {
          sample = trace.e[static_cast<size_t>(j - 1)].col(
              trace.grid_index(ts));
        }
        const Eigen::VectorXd gap =
            trace.e[static_cast<size_t>(j - 1)].col(gt) - sample;
        supply += kQuarterPiSq * gap.dot(cj.W * gap);
      }
      terms.push_back(-supply);

      Eigen::VectorXd neigh_sum = Eigen::VectorXd::Zero(ei.size());
      for (int j : graph.neighborhood(i)) {
        neigh_sum += trace.e[static_cast<size_t>(j - 1)].col(gt);
      }
      terms.push_back(static_cast<double>(graph.in_degree(i) +
                                          graph.out_degree(i)) /
                      g2 * ei.squaredNorm());
      terms.push_back(-2.0 / g2 * ei.dot(neigh_sum));

      const double xi_sq =
          trace.w.col(gt).squaredNorm() +
          trace.v[static_cast<size_t>(i - 1)].col(gt).squaredNorm();
      terms.push_back(-xi_sq);

      LyapunovSample sample;
      sample.time = time;
      sample.node = i;
      for (double term : terms) {
        sample.lhs += term;
        sample.scale += std::abs(term);
      }
      sample.scale = std::max(sample.scale, 1e-12);
      sample.normalized = sample.lhs / sample.scale;
      sample.functional = v_all[static_cast<size_t>(i - 1)];
      // terms[0..5] sum to the analytic Vdot + 2 alpha V.
      sample.analytic_derivative = terms[0] + terms[1] + terms[2] + terms[3] +
                                   terms[4] + terms[5] -
                                   2.0 * c.alpha * sample.functional;
      const double v_fwd =
          functional_value(trace, c, i, time + trace.dt);
      const double v_bwd =
          functional_value(trace, c, i, time - trace.dt);
      sample.fd_derivative = (v_fwd - v_bwd) / (2.0 * trace.dt);

      report.max_normalized =
          std::max(report.max_normalized, sample.normalized);
      report.samples.push_back(std::move(sample));
    }
  }
  return report;
}

void write_trace_csv(const SimulationTrace& trace,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }
  const int n = trace.model().n();
  const int nn = trace.model().node_count();
  out << 't';
  for (int c = 0; c < n; ++c) {
    out << ", x[" << c << ']';
  }
  for (int i = 1; i <= nn; ++i) {
    for (int c = 0; c < n; ++c) {
      out << ", xhat" << i << '[' << c << ']';
    }
  }
  for (int i = 1; i <= nn; ++i) {
    for (int c = 0; c < n; ++c) {
      out << ", e" << i << '[' << c << ']';
    }
  }
  out << '\n';

  char buf[32];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << ',' << buf;
  };
  for (long g = 0; g < trace.sample_count(); ++g) {
    std::snprintf(buf, sizeof buf, "%.17g", trace.t[static_cast<size_t>(g)]);
    out << buf;
    for (int c = 0; c < n; ++c) {
      emit(trace.x(c, g));
    }
    for (int i = 0; i < nn; ++i) {
      for (int c = 0; c < n; ++c) {
        emit(trace.xhat[static_cast<size_t>(i)](c, g));
      }
    }
    for (int i = 0; i < nn; ++i) {
      for (int c = 0; c < n; ++c) {
        emit(trace.e[static_cast<size_t>(i)](c, g));
      }
    }
    out << '\n';
  }
}

} // namespace rrhoc
