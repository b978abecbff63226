#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "rrhoc/synthesis.hpp"
#include "test_util.hpp"

using namespace rrhoc;

namespace {

// Two scalar observers polling each other; mildly unstable plant so the
// problem is nontrivial but easily feasible at a loose gamma.
NetworkModel toy_model() {
  PlantModel plant;
  plant.A = Eigen::MatrixXd::Constant(1, 1, 0.2);
  plant.B2 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  plant.x0 = Eigen::VectorXd::Constant(1, 1.0);
  NodeMeasurement node;
  node.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
  node.D2 = Eigen::MatrixXd::Zero(1, 1);
  node.Dbar2 = Eigen::MatrixXd::Constant(1, 1, 0.1);
  node.H = Eigen::MatrixXd::Identity(1, 1);
  return NetworkModel(std::move(plant), {node, node});
}

DirectedGraph toy_graph() { return DirectedGraph(2, {{1, 2}, {2, 1}}); }

SamplingSchedule toy_schedule() { return SamplingSchedule::uniform(0.1, 5.0); }

// the toy sits in a narrow corner of the scalar grid: it needs a slow
// decay rate, strong coupling credit, and a small slack multiplier
SynthesisOptions quick_options() {
  SynthesisOptions options;
  options.alpha_grid = {0.1, 0.5};
  options.pi_fraction_grid = {0.5};
  options.eps_grid = {0.1};
  return options;
}

} // namespace

TEST_SUITE("synthesis") {

TEST_CASE("a loose gamma is feasible and survives the eigenvalue recheck") {
  const NetworkModel model = toy_model();
  const DirectedGraph graph = toy_graph();
  const SamplingSchedule schedule = toy_schedule();

  const SynthesisResult result =
      synthesize(model, graph, schedule, 50.0, quick_options());
  REQUIRE(result.feasible);
  CHECK(result.gamma == 50.0);
  CHECK(result.gains.size() == 2);
  CHECK(result.certificates.size() == 2);
  CHECK(result.slacks.size() == 2);
  CHECK(result.verification.ok);
  CHECK(!result.attempts.empty());
  CHECK(result.initial_weight.rows() == 1);
  CHECK(result.initial_weight(0, 0) > 0.0);

  // independent re-verification from the stored witness alone
  const VerifyReport again =
      recheck_witness(model, graph, result.certificates, result.slacks,
                      result.gains, result.gamma);
  CHECK(again.ok);
  for (const auto& check : again.checks) {
    CHECK(check.ok);
  }

  // certificates must match what the raw solution vector encodes
  const SynthesisProblem sp = build_synthesis_problem(
      model, graph, result.certificates, {result.eps, result.eps},
      {result.eps, result.eps}, result.gamma);
  REQUIRE(result.raw_x.size() == sp.problem.layout.dimension());
  const auto certs = extract_certificates(sp, result.raw_x);
  const auto slacks = extract_synthesis_slacks(sp, result.raw_x);
  CHECK(certs[0].Yhat.isApprox(result.certificates[0].Yhat, 1e-12));
  CHECK(certs[1].R.isApprox(result.certificates[1].R, 1e-12));
  CHECK(slacks[0].X.isApprox(result.slacks[0].X, 1e-12));
  CHECK(slacks[1].U.isApprox(result.slacks[1].U, 1e-12));
}

TEST_CASE("unobservable nodes make the joint problem stall") {
  PlantModel plant;
  plant.A = Eigen::MatrixXd::Constant(1, 1, 0.2);
  plant.B2 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  NodeMeasurement blind;
  blind.C = Eigen::MatrixXd::Zero(1, 1); // no output information at all
  blind.D2 = Eigen::MatrixXd::Zero(1, 1);
  blind.Dbar2 = Eigen::MatrixXd::Constant(1, 1, 0.1);
  blind.H = Eigen::MatrixXd::Identity(1, 1);
  const NetworkModel model(std::move(plant), {blind, blind});

  SynthesisOptions options;
  options.alpha_grid = {0.5};
  options.pi_fraction_grid = {0.25};
  options.eps_grid = {1.0};
  const SynthesisResult result =
      synthesize(model, toy_graph(), toy_schedule(), 10.0, options);
  CHECK(!result.feasible);
  CHECK(!result.attempts.empty());
  for (const auto& attempt : result.attempts) {
    CHECK(attempt.status != SolveStatus::Feasible);
  }
}

TEST_CASE("bisection returns the smallest probed feasible gamma") {
  const NetworkModel model = toy_model();
  const DirectedGraph graph = toy_graph();
  const SamplingSchedule schedule = toy_schedule();

  BisectionOptions bisect;
  bisect.tol = 0.25;
  const GammaSearchResult search =
      minimize_gamma(model, graph, schedule, quick_options(), bisect);
  REQUIRE(search.feasible);
  CHECK(search.best.feasible);
  CHECK(search.best.gamma == search.gamma_min);
  CHECK(search.best.verification.ok);
  CHECK(search.monotone_on_probes);
  CHECK(search.monotonicity.size() == 2);
  for (const auto& probe : search.monotonicity) {
    CHECK(probe.feasible);
    CHECK(probe.gamma > search.gamma_min);
  }

  // every probe below gamma_min failed, every one at/above it succeeded
  for (const auto& probe : search.probes) {
    if (probe.gamma < search.gamma_min) {
      CHECK(!probe.feasible);
    }
  }
  bool saw_feasible_probe = false;
  for (const auto& probe : search.probes) {
    saw_feasible_probe = saw_feasible_probe || probe.feasible;
  }
  CHECK(saw_feasible_probe);
}

TEST_CASE("analysis certifies synthesized gains at a looser gamma") {
  const NetworkModel model = toy_model();
  const DirectedGraph graph = toy_graph();
  const SamplingSchedule schedule = toy_schedule();

  const SynthesisResult base =
      synthesize(model, graph, schedule, 50.0, quick_options());
  REQUIRE(base.feasible);

  const AnalysisResult analysis = analyze_gains(
      model, graph, schedule, base.gains, 75.0, quick_options());
  REQUIRE(analysis.feasible);
  CHECK(analysis.gamma == 75.0);
  CHECK(analysis.verification.ok);
  CHECK(analysis.certificates.size() == 2);
  CHECK(analysis.slacks.size() == 2);
  CHECK(analysis.initial_weight.rows() == 1);
}

TEST_CASE("the recheck rejects corrupted witnesses") {
  const NetworkModel model = toy_model();
  const DirectedGraph graph = toy_graph();

  const SynthesisResult base =
      synthesize(model, graph, toy_schedule(), 50.0, quick_options());
  REQUIRE(base.feasible);

  auto bad_gains = base.gains;
  bad_gains[0].L = -bad_gains[0].L;
  bad_gains[1].L = -bad_gains[1].L;
  const VerifyReport report =
      recheck_witness(model, graph, base.certificates, base.slacks, bad_gains,
                      base.gamma);
  CHECK(!report.ok);

  auto bad_certs = base.certificates;
  bad_certs[0].Yhat = -bad_certs[0].Yhat;
  CHECK(!recheck_witness(model, graph, bad_certs, base.slacks, base.gains,
                         base.gamma)
             .ok);
}

TEST_CASE("warm starts reuse the previous witness") {
  const NetworkModel model = toy_model();
  const DirectedGraph graph = toy_graph();
  const SamplingSchedule schedule = toy_schedule();

  const SynthesisResult base =
      synthesize(model, graph, schedule, 50.0, quick_options());
  REQUIRE(base.feasible);

  const SynthesisResult warmed =
      synthesize(model, graph, schedule, 55.0, quick_options(), &base);
  REQUIRE(warmed.feasible);
  CHECK(warmed.verification.ok);
  // the warm pass starts from the seeded scalars, so the first attempt wins
  CHECK(warmed.attempts.front().status == SolveStatus::Feasible);
  CHECK(warmed.alpha == base.alpha);
}

TEST_CASE("synthesis validates its inputs") {
  const NetworkModel model = toy_model();
  const DirectedGraph graph = toy_graph();
  const SamplingSchedule schedule = toy_schedule();

  CHECK_THROWS_AS(synthesize(model, graph, schedule, 0.0, quick_options()),
                  std::invalid_argument);

  SynthesisOptions bad_fraction = quick_options();
  bad_fraction.pi_fraction_grid = {1.0};
  CHECK_THROWS_AS(synthesize(model, graph, schedule, 10.0, bad_fraction),
                  std::invalid_argument);

  SynthesisOptions empty_grid = quick_options();
  empty_grid.alpha_grid = {};
  CHECK_THROWS_AS(synthesize(model, graph, schedule, 10.0, empty_grid),
                  std::invalid_argument);
}

} // TEST_SUITE
