#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "rrhoc/observer.hpp"
#include "rrhoc/synthesis.hpp"
#include "test_util.hpp"

using namespace rrhoc;

namespace {

// damped double integrator with a closed-form matrix exponential
PlantModel chain_plant() {
  PlantModel plant;
  plant.A = Eigen::MatrixXd{{0.0, 1.0}, {0.0, -0.5}};
  plant.B2 = Eigen::MatrixXd{{0.0}, {1.0}};
  plant.x0 = Eigen::VectorXd{{1.0, -0.4}};
  return plant;
}

NodeMeasurement chain_node() {
  NodeMeasurement node;
  node.C = Eigen::MatrixXd{{1.0, 0.0}};
  node.D2 = Eigen::MatrixXd::Zero(1, 1);
  node.Dbar2 = Eigen::MatrixXd{{0.1}};
  node.H = Eigen::MatrixXd::Identity(2, 2);
  return node;
}

NetworkModel chain_model() {
  return NetworkModel(chain_plant(), {chain_node(), chain_node()});
}

DirectedGraph mutual_graph() { return DirectedGraph(2, {{1, 2}, {2, 1}}); }

NetworkDisturbance quiet(const NetworkModel& model) {
  std::vector<DisturbanceSignal> v;
  for (int i = 1; i <= model.node_count(); ++i) {
    v.push_back(DisturbanceSignal::zero(model.m_v(i)));
  }
  return {"quiet", DisturbanceSignal::zero(model.m_w()), std::move(v)};
}

std::vector<NodeGains> zero_gains(const NetworkModel& model) {
  std::vector<NodeGains> gains;
  for (int i = 1; i <= model.node_count(); ++i) {
    gains.push_back({Eigen::MatrixXd::Zero(model.n(), model.node(i).l()),
                     Eigen::MatrixXd::Zero(model.n(), model.node(i).r())});
  }
  return gains;
}

Eigen::MatrixXd exact_exp_chain(double t) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, 2.0 * (1.0 - std::exp(-0.5 * t)), 0.0, std::exp(-0.5 * t);
  return m;
}

// scalar network used where speed matters
NetworkModel scalar_model(double a) {
  PlantModel plant;
  plant.A = Eigen::MatrixXd::Constant(1, 1, a);
  plant.B2 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  plant.x0 = Eigen::VectorXd::Constant(1, 1.0);
  NodeMeasurement node;
  node.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
  node.D2 = Eigen::MatrixXd::Zero(1, 1);
  node.Dbar2 = Eigen::MatrixXd::Constant(1, 1, 0.1);
  node.H = Eigen::MatrixXd::Identity(1, 1);
  return NetworkModel(std::move(plant), {node, node});
}

} // namespace

TEST_SUITE("observer") {

TEST_CASE("with all gains zero the error follows the plant flow") {
  const NetworkModel model = chain_model();
  const SamplingSchedule schedule = SamplingSchedule::uniform(0.1, 2.0);
  const SimulationTrace trace =
      simulate(model, mutual_graph(), schedule, zero_gains(model),
               quiet(model), 1e-3);

  REQUIRE(trace.sample_count() == 2001);
  const Eigen::VectorXd x0 = model.plant().initial_state();
  for (double time : {0.0, 0.4, 1.0, 2.0}) {
    const long g = trace.grid_index(time);
    const Eigen::VectorXd want = exact_exp_chain(time) * x0;
    CHECK((trace.x.col(g) - want).norm() < 1e-9);
    CHECK((trace.e[0].col(g) - want).norm() < 1e-9);
    CHECK((trace.e[1].col(g) - want).norm() < 1e-9);
    CHECK(trace.xhat[0].col(g).norm() < 1e-12);
  }
  CHECK(trace.xi_energy == 0.0);
}

TEST_CASE("pure output injection reduces to the matrix exponential") {
  const NetworkModel model = chain_model();
  const SamplingSchedule schedule = SamplingSchedule::uniform(0.1, 2.0);
  auto gains = zero_gains(model);
  gains[0].L = Eigen::MatrixXd{{1.0}, {0.3}};
  gains[1].L = Eigen::MatrixXd{{0.6}, {0.2}};

  const SimulationTrace trace = simulate(model, mutual_graph(), schedule,
                                         gains, quiet(model), 1e-3);
  const Eigen::VectorXd x0 = model.plant().initial_state();
  for (int i = 0; i < 2; ++i) {
    const Eigen::MatrixXd acl =
        model.plant().A - gains[i].L * model.node(i + 1).C;
    for (double time : {0.5, 1.0, 2.0}) {
      const long g = trace.grid_index(time);
      const Eigen::VectorXd want = (acl * time).exp() * x0;
      const double scale = std::max(1.0, want.norm());
      CHECK((trace.e[i].col(g) - want).norm() < 1e-8 * scale);
    }
  }
}

TEST_CASE("halving the step hardly moves a converged trajectory") {
  const NetworkModel model = scalar_model(0.2);
  const DirectedGraph graph = mutual_graph();
  const SamplingSchedule schedule = SamplingSchedule::uniform(0.1, 1.0);
  auto gains = zero_gains(model);
  gains[0].L = Eigen::MatrixXd::Constant(1, 1, 1.0);
  gains[1].L = Eigen::MatrixXd::Constant(1, 1, 0.8);
  gains[0].K = Eigen::MatrixXd::Constant(1, 1, 0.3);
  gains[1].K = Eigen::MatrixXd::Constant(1, 1, 0.3);
  NetworkDisturbance shaken = quiet(model);
  shaken.w = DisturbanceSignal::windowed_sinusoid(
      Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1),
      Eigen::VectorXd::Zero(1), 1.0);

  const SimulationTrace coarse =
      simulate(model, graph, schedule, gains, shaken, 1e-2);
  const SimulationTrace fine =
      simulate(model, graph, schedule, gains, shaken, 1e-4);
  double worst = 0.0;
  for (long g = 0; g < coarse.sample_count(); ++g) {
    const long gf = fine.grid_index(coarse.t[static_cast<size_t>(g)]);
    const double scale = std::max(1.0, fine.x.col(gf).norm());
    worst = std::max(worst,
                     (coarse.x.col(g) - fine.x.col(gf)).norm() / scale);
    worst = std::max(
        worst, (coarse.e[0].col(g) - fine.e[0].col(gf)).norm() / scale);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("buffers hold the round robin history") {
  const NetworkModel model = scalar_model(0.0);
  NodeMeasurement node = model.node(1);
  const NetworkModel model3(
      PlantModel{Eigen::MatrixXd::Constant(1, 1, 0.0),
                 Eigen::MatrixXd::Constant(1, 1, 1.0),
                 Eigen::VectorXd::Constant(1, 1.0)},
      {node, node, node});
  const DirectedGraph graph(3, {{2, 1}, {3, 1}, {1, 2}, {2, 3}, {1, 3}});
  const SamplingSchedule schedule = SamplingSchedule::uniform(0.1, 1.0);
  const SimulationTrace trace = simulate(model3, graph, schedule,
                                         zero_gains(model3), quiet(model3),
                                         1e-2);

  REQUIRE(trace.buffers.size() == 11);
  for (int k = 0; k <= 10; ++k) {
    for (int i = 1; i <= 3; ++i) {
      const auto& neigh = graph.neighborhood(i);
      const auto perm = permutation_power(graph, i, k);
      CHECK(trace.polls[static_cast<size_t>(k)][static_cast<size_t>(i - 1)] ==
            perm.front());
      const auto& buf =
          trace.buffers[static_cast<size_t>(k)][static_cast<size_t>(i - 1)];
      REQUIRE(buf.size() == neigh.size());
      for (size_t s = 0; s < neigh.size(); ++s) {
        const int nu = index_in_permutation(graph, i, k, neigh[s]);
        const int born = k - nu + 1;
        if (born >= 0) {
          CHECK(buf[s].timestamp ==
                doctest::Approx(schedule.time_at(born)).epsilon(1e-12));
        } else {
          CHECK(buf[s].timestamp < 0.0);
        }
      }
    }
  }
}

TEST_CASE("the disagreement cost of a hand-built trace is exact") {
  const NetworkModel model = scalar_model(0.0);
  const DirectedGraph graph = mutual_graph();
  SimulationTrace trace(model, graph, SamplingSchedule::uniform(0.5, 1.0));
  trace.t = {0.0, 0.5, 1.0};
  trace.x = Eigen::MatrixXd::Zero(1, 3);
  trace.e = {Eigen::MatrixXd::Constant(1, 3, 0.7),
             Eigen::MatrixXd::Constant(1, 3, -0.7)};
  trace.xhat = trace.e;
  trace.dt = 0.5;
  trace.x0 = Eigen::VectorXd::Zero(1);

  // J = (1/2) * 2 * ||2c||^2 * 1 = 4 c^2 with c = 0.7
  CHECK(disagreement_cost(trace, graph) == doctest::Approx(1.96).epsilon(1e-12));
}

TEST_CASE("the ratio does not see a rescaled disturbance when x0 = 0") {
  const NetworkModel model = scalar_model(0.2);
  const DirectedGraph graph = mutual_graph();
  const SamplingSchedule schedule = SamplingSchedule::uniform(0.1, 4.0);
  auto gains = zero_gains(model);
  gains[0].L = Eigen::MatrixXd::Constant(1, 1, 1.0);
  gains[1].L = Eigen::MatrixXd::Constant(1, 1, 0.8);

  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(1);
  double ratios[2] = {0.0, 0.0};
  for (int scale = 1; scale <= 2; ++scale) {
    NetworkDisturbance d = quiet(model);
    d.w = DisturbanceSignal::windowed_sinusoid(
        Eigen::VectorXd::Constant(1, 0.5 * scale),
        Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1), 2.0);
    const SimulationTrace trace =
        simulate(model, graph, schedule, gains, d, 1e-3, &origin);
    CHECK(trace.x0.isZero());
    CHECK(trace.xi_energy > 0.0);
    ratios[scale - 1] =
        performance_ratio(trace, Eigen::MatrixXd::Identity(1, 1));
  }
  CHECK(ratios[0] == doctest::Approx(ratios[1]).epsilon(1e-9));
}

TEST_CASE("ratio rejects bad weights and empty denominators") {
  const NetworkModel model = scalar_model(0.2);
  const SimulationTrace trace =
      simulate(model, mutual_graph(), SamplingSchedule::uniform(0.1, 1.0),
               zero_gains(model), quiet(model), 1e-2);
  CHECK_THROWS_AS(performance_ratio(trace, Eigen::MatrixXd::Identity(2, 2)),
                  std::invalid_argument);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(1, 1);
  CHECK_NOTHROW(performance_ratio(trace, asym));

  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(1);
  const SimulationTrace empty =
      simulate(model, mutual_graph(), SamplingSchedule::uniform(0.1, 1.0),
               zero_gains(model), quiet(model), 1e-2, &origin);
  CHECK_THROWS_AS(performance_ratio(empty, Eigen::MatrixXd::Identity(1, 1)),
                  std::invalid_argument);
}

TEST_CASE("the decay estimate recovers the closed-loop rate") {
  const NetworkModel model = scalar_model(0.2);
  const DirectedGraph graph = mutual_graph();
  const SamplingSchedule schedule = SamplingSchedule::uniform(0.1, 8.0);
  auto gains = zero_gains(model);
  gains[0].L = Eigen::MatrixXd::Constant(1, 1, 1.5);
  gains[1].L = Eigen::MatrixXd::Constant(1, 1, 1.5);

  const SimulationTrace good =
      simulate(model, graph, schedule, gains, quiet(model), 1e-3);
  const double beta = decay_rate_estimate(good);
  CHECK(beta == doctest::Approx(1.3).epsilon(0.1)); // a - L = -1.3
  CHECK(horizon_adequate(good));

  auto flipped = gains;
  flipped[0].L = -flipped[0].L;
  flipped[1].L = -flipped[1].L;
  const SimulationTrace bad =
      simulate(model, graph, schedule, flipped, quiet(model), 1e-3);
  CHECK(decay_rate_estimate(bad) < 0.0);
  CHECK(!horizon_adequate(bad));
}

TEST_CASE("trace csv starts with the documented header") {
  const NetworkModel model = scalar_model(0.2);
  const SimulationTrace trace =
      simulate(model, mutual_graph(), SamplingSchedule::uniform(0.1, 0.5),
               zero_gains(model), quiet(model), 0.1);
  const auto path = std::filesystem::temp_directory_path() /
                    "rrhoc_trace_header.csv";
  write_trace_csv(trace, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "t, x[0], xhat1[0], xhat2[0], e1[0], e2[0]");
  long rows = 0;
  std::string line;
  std::string first_row;
  while (std::getline(in, line)) {
    if (rows == 0) {
      first_row = line;
    }
    ++rows;
  }
  CHECK(rows == trace.sample_count());
  CHECK(first_row.substr(0, 2) == "0,");
  std::filesystem::remove(path);
}

TEST_CASE("lyapunov diagnostics accept only well-posed check times") {
  const NetworkModel model = scalar_model(0.2);
  const DirectedGraph graph = mutual_graph();
  const SamplingSchedule schedule = SamplingSchedule::uniform(0.1, 5.0);

  const SynthesisOptions options = [] {
    SynthesisOptions o;
    o.alpha_grid = {0.1};
    o.pi_fraction_grid = {0.5};
    o.eps_grid = {0.1};
    return o;
  }();
  const SynthesisResult witness =
      synthesize(model, graph, schedule, 50.0, options);
  REQUIRE(witness.feasible);

  const SimulationTrace trace = simulate(model, graph, schedule,
                                         witness.gains, quiet(model), 1e-3);
  // mid-interval times keep the central difference away from the
  // derivative jumps at the sampling instants
  const LyapunovReport report = lyapunov_diagnostic(
      trace, witness.certificates, witness.gamma, {0.25, 0.55, 1.05, 2.05});
  REQUIRE(report.samples.size() == 8); // 4 times x 2 nodes
  CHECK(report.max_normalized <= 1e-6);
  for (const auto& sample : report.samples) {
    CHECK(sample.scale > 0.0);
    // the analytic derivative and the finite difference tell one story
    const double tol =
        1e-2 * std::max({1.0, std::abs(sample.analytic_derivative)});
    CHECK(std::abs(sample.fd_derivative - sample.analytic_derivative) <= tol);
  }

  CHECK_THROWS_WITH_AS(
      lyapunov_diagnostic(trace, witness.certificates, witness.gamma,
                          {0.05}),
      doctest::Contains("startup window"), std::invalid_argument);
  CHECK_THROWS_AS(lyapunov_diagnostic(trace, witness.certificates,
                                      witness.gamma, {0.12345678}),
                  std::invalid_argument);
  CHECK_THROWS_AS(lyapunov_diagnostic(trace, witness.certificates,
                                      witness.gamma, {}),
                  std::invalid_argument);
  CHECK_THROWS_AS(lyapunov_diagnostic(trace, witness.certificates, 0.0,
                                      {0.5}),
                  std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      lyapunov_diagnostic(trace, witness.certificates, witness.gamma,
                          {5.0}),
      doctest::Contains("boundary"), std::invalid_argument);
}

TEST_CASE("grid lookup and input validation") {
  const NetworkModel model = scalar_model(0.2);
  const DirectedGraph graph = mutual_graph();
  const SamplingSchedule schedule = SamplingSchedule::uniform(0.1, 1.0);
  const SimulationTrace trace = simulate(model, graph, schedule,
                                         zero_gains(model), quiet(model),
                                         1e-2);
  CHECK(trace.grid_index(0.5) == 50);
  CHECK(trace.grid_index(0.0) == 0);
  CHECK_THROWS_AS(trace.grid_index(0.505), std::invalid_argument);

  CHECK_THROWS_WITH_AS(
      simulate(model, graph, schedule, zero_gains(model), quiet(model), 0.03),
      doctest::Contains("does not divide"), std::invalid_argument);

  auto short_gains = zero_gains(model);
  short_gains.pop_back();
  CHECK_THROWS_WITH_AS(
      simulate(model, graph, schedule, short_gains, quiet(model), 0.01),
      doctest::Contains("one gain set per node"), std::invalid_argument);

  auto fat_gains = zero_gains(model);
  fat_gains[0].L = Eigen::MatrixXd::Zero(2, 1);
  CHECK_THROWS_WITH_AS(
      simulate(model, graph, schedule, fat_gains, quiet(model), 0.01),
      doctest::Contains("gain dimensions wrong"), std::invalid_argument);

  NetworkDisturbance bad = quiet(model);
  bad.v[0] = DisturbanceSignal::zero(4);
  CHECK_THROWS_AS(
      simulate(model, graph, schedule, zero_gains(model), bad, 0.01),
      std::invalid_argument);
}

} // TEST_SUITE
