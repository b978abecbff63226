#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "rrhoc/config.hpp"
#include "test_util.hpp"

using namespace rrhoc;

namespace {

Json minimal_config() {
  return Json::parse(R"({
    "plant": {"A": [[0.2]], "B": [[1.0]], "x0": [1.0]},
    "nodes": [
      {"C": [[1.0]], "Dbar": [[0.1]]},
      {"C": [[1.0]], "Dbar": [[0.1]]}
    ],
    "graph": {"edges": [[1, 2], [2, 1]]},
    "schedule": {"step": 0.1, "horizon": 5.0}
  })");
}

SynthesisResult sample_result() {
  SynthesisResult result;
  result.feasible = true;
  result.gamma = 2.5;
  result.alpha = 0.5;
  result.pi_fraction = 0.25;
  result.eps = 1.0;
  std::mt19937_64 rng(17);
  for (int i = 0; i < 2; ++i) {
    NodeCertificates c;
    c.Yhat = testutil::random_spd(rng, 1);
    c.S = testutil::random_spd(rng, 1);
    c.R = testutil::random_spd(rng, 1);
    c.W = testutil::random_spd(rng, 1);
    c.G = testutil::random_matrix(rng, 1, 1);
    c.alpha = 0.5;
    c.pi = 0.25;
    c.tau = 0.1;
    result.certificates.push_back(std::move(c));
    SynthesisSlacks s;
    s.X = testutil::random_matrix(rng, 1, 1);
    s.F = testutil::random_matrix(rng, 1, 1);
    s.U = testutil::random_matrix(rng, 1, 1);
    s.eps = 1.0;
    s.eps_bar = 1.0;
    result.slacks.push_back(std::move(s));
    result.gains.push_back({testutil::random_matrix(rng, 1, 1),
                            testutil::random_matrix(rng, 1, 1)});
  }
  result.initial_weight = testutil::random_spd(rng, 1);
  result.verification.ok = true;
  result.attempts.push_back({0.5, 0.25, 1.0, SolveStatus::Feasible, 17, 0.0});
  return result;
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("a minimal document parses with the documented defaults") {
  const ToolConfig cfg = parse_config(minimal_config());
  CHECK(cfg.plant.A(0, 0) == 0.2);
  CHECK(cfg.nodes.size() == 2);
  CHECK(cfg.edges.size() == 2);
  CHECK(cfg.uniform_schedule);
  CHECK(cfg.step == 0.1);
  CHECK(cfg.horizon == 5.0);
  CHECK(!cfg.fixed_gamma.has_value());
  CHECK(cfg.dt == 1e-3);
  CHECK(cfg.seed == 1);
  CHECK(cfg.battery.seed == 1);
  CHECK(cfg.out_dir == ".");
  CHECK(cfg.sweep_steps.empty());
  CHECK(cfg.synthesis.alpha_grid == std::vector<double>{0.1, 0.5, 1.0, 2.0});
  CHECK(cfg.make_model().node_count() == 2);
  CHECK(cfg.make_graph().node_count() == 2);
  CHECK(cfg.make_schedule().step() == 0.1);
  // omitted blocks fall back to identity coupling and zero feedthrough
  CHECK(cfg.nodes[0].H.isIdentity());
  CHECK(cfg.nodes[0].D2.isZero());
}

TEST_CASE("optional blocks reach their destinations") {
  Json j = minimal_config();
  j["gamma"] = {{"fixed", 50.0}};
  j["grid"] = {{"alpha", {0.5, 1.0}},
               {"coupling_fraction", {0.25}},
               {"eps", {0.5}}};
  j["solver"] = {{"max_iterations", 500}, {"stall_window", 30}};
  j["battery"] = {{"count", 5}, {"amplitude", 2.0},
                  {"support_fraction", 0.5}, {"piece_step", 0.2}};
  j["certify"] = {{"ratio_tolerance", 0.1}, {"lyapunov_tolerance", 1e-5},
                  {"checks", 4}};
  j["dt"] = 0.01;
  j["seed"] = 77;
  j["sweep"] = {{"steps", {0.2, 0.1}}};
  j["out"] = "reports";

  const ToolConfig cfg = parse_config(j);
  CHECK(cfg.fixed_gamma == 50.0);
  CHECK(cfg.synthesis.alpha_grid == std::vector<double>{0.5, 1.0});
  CHECK(cfg.synthesis.budget.max_iterations == 500);
  CHECK(cfg.synthesis.budget.stall_window == 30);
  CHECK(cfg.battery.scenario_count == 5);
  CHECK(cfg.battery.amplitude == 2.0);
  CHECK(cfg.battery.support_fraction == 0.5);
  CHECK(cfg.battery.piece_step == 0.2);
  CHECK(cfg.battery.seed == 77);
  CHECK(cfg.certify.ratio_tolerance == 0.1);
  CHECK(cfg.certify.lyapunov_check_count == 4);
  CHECK(cfg.dt == 0.01);
  CHECK(cfg.seed == 77);
  CHECK(cfg.sweep_steps == std::vector<double>{0.2, 0.1});
  CHECK(cfg.out_dir == "reports");
}

TEST_CASE("bisection settings live under gamma") {
  Json j = minimal_config();
  j["gamma"] = {{"bisection", {{"init", 2.0}, {"tolerance", 0.1},
                               {"cap", 100.0}}}};
  const ToolConfig cfg = parse_config(j);
  CHECK(!cfg.fixed_gamma.has_value());
  CHECK(cfg.bisection.gamma_init == 2.0);
  CHECK(cfg.bisection.tol == 0.1);
  CHECK(cfg.bisection.gamma_cap == 100.0);

  Json both = minimal_config();
  both["gamma"] = {{"fixed", 2.0}, {"bisection", Json::object()}};
  CHECK_THROWS_WITH_AS(parse_config(both),
                       "gamma: expected exactly one of `fixed` or `bisection`",
                       ConfigError);

  Json neither = minimal_config();
  neither["gamma"] = Json::object();
  CHECK_THROWS_AS(parse_config(neither), ConfigError);
}

TEST_CASE("explicit sampling instants replace the uniform grid") {
  Json j = minimal_config();
  j["schedule"] = {{"times", {0.0, 0.1, 0.25, 0.3}}};
  const ToolConfig cfg = parse_config(j);
  CHECK(!cfg.uniform_schedule);
  CHECK(cfg.make_schedule().count() == 4);

  j["schedule"] = {{"times", {0.0}}};
  CHECK_THROWS_WITH_AS(parse_config(j),
                       "schedule.times: expected at least two instants",
                       ConfigError);
}

TEST_CASE("schema violations name the offending path") {
  Json no_plant = minimal_config();
  no_plant.erase("plant");
  CHECK_THROWS_WITH_AS(parse_config(no_plant),
                       "(root).plant: missing required field", ConfigError);

  Json bogus = minimal_config();
  bogus["bogus"] = 1;
  CHECK_THROWS_WITH_AS(parse_config(bogus), "(root).bogus: unknown field",
                       ConfigError);

  Json nested = minimal_config();
  nested["schedule"]["cadence"] = 1;
  CHECK_THROWS_WITH_AS(parse_config(nested),
                       "schedule.cadence: unknown field", ConfigError);

  Json wide_c = Json::parse(R"({
    "plant": {"A": [[0.0, 1.0], [0.0, -0.5]], "B": [[0.0], [1.0]]},
    "nodes": [{"C": [[1.0]]}],
    "graph": {"edges": []},
    "schedule": {"step": 0.1, "horizon": 5.0}
  })");
  CHECK_THROWS_WITH_AS(parse_config(wide_c),
                       "nodes[0].C: expected 2 columns to match plant.A",
                       ConfigError);

  Json ragged = minimal_config();
  ragged["plant"]["A"] = Json::parse("[[1.0, 2.0], [3.0]]");
  CHECK_THROWS_WITH_AS(parse_config(ragged),
                       "plant.A[1]: ragged matrix: expected 2 entries, got 1",
                       ConfigError);

  Json stringy = minimal_config();
  stringy["plant"]["A"] = Json::parse(R"([["one"]])");
  CHECK_THROWS_WITH_AS(parse_config(stringy),
                       "plant.A[0][0]: expected a number", ConfigError);

  Json bad_edge = minimal_config();
  bad_edge["graph"]["edges"] = Json::parse("[[0, 2]]");
  CHECK_THROWS_WITH_AS(parse_config(bad_edge),
                       "graph.edges[0]: node ids must lie in 1..2",
                       ConfigError);

  Json self_loop = minimal_config();
  self_loop["graph"]["edges"] = Json::parse("[[1, 1], [1, 2], [2, 1]]");
  CHECK_THROWS_WITH_AS(parse_config(self_loop),
                       doctest::Contains("(root): cross-validation failed"),
                       ConfigError);

  Json short_horizon = minimal_config();
  short_horizon["schedule"]["horizon"] = 0.05;
  CHECK_THROWS_WITH_AS(parse_config(short_horizon),
                       "schedule.horizon: expected horizon > step",
                       ConfigError);

  Json bad_fraction = minimal_config();
  bad_fraction["grid"] = {{"coupling_fraction", {1.0}}};
  CHECK_THROWS_WITH_AS(parse_config(bad_fraction),
                       "grid.coupling_fraction[0]: expected a fraction in "
                       "[0, 1)",
                       ConfigError);

  Json bad_count = minimal_config();
  bad_count["battery"] = {{"count", 0}};
  CHECK_THROWS_WITH_AS(parse_config(bad_count),
                       "battery.count: expected a positive integer",
                       ConfigError);

  Json bad_dt = minimal_config();
  bad_dt["dt"] = 0.0;
  CHECK_THROWS_WITH_AS(parse_config(bad_dt), "dt: expected a positive number",
                       ConfigError);

  Json bad_seed = minimal_config();
  bad_seed["seed"] = -3;
  CHECK_THROWS_WITH_AS(parse_config(bad_seed),
                       "seed: expected a nonnegative integer", ConfigError);

  Json empty_sweep = minimal_config();
  empty_sweep["sweep"] = {{"steps", Json::array()}};
  CHECK_THROWS_WITH_AS(parse_config(empty_sweep),
                       "sweep.steps: expected a nonempty list", ConfigError);
}

TEST_CASE("matrices survive the json round trip") {
  std::mt19937_64 rng(23);
  const Eigen::MatrixXd m = testutil::random_matrix(rng, 3, 2, 5.0);
  const Eigen::MatrixXd back =
      matrix_from_json(matrix_to_json(m), "roundtrip");
  CHECK((back - m).cwiseAbs().maxCoeff() == 0.0);

  const Eigen::VectorXd v = testutil::random_vector(rng, 4, 5.0);
  CHECK((vector_from_json(vector_to_json(v), "roundtrip") - v).norm() == 0.0);
}

TEST_CASE("synthesis results survive the json round trip") {
  const SynthesisResult result = sample_result();
  const Json j = to_json(result);
  const SynthesisResult back = synthesis_result_from_json(j, "witness");
  CHECK(back.feasible == result.feasible);
  CHECK(back.gamma == result.gamma);
  CHECK(back.alpha == result.alpha);
  CHECK(back.pi_fraction == result.pi_fraction);
  CHECK(back.eps == result.eps);
  REQUIRE(back.gains.size() == 2);
  CHECK(back.gains[0].K == result.gains[0].K);
  CHECK(back.gains[1].L == result.gains[1].L);
  REQUIRE(back.certificates.size() == 2);
  CHECK(back.certificates[0].Yhat == result.certificates[0].Yhat);
  CHECK(back.certificates[1].G == result.certificates[1].G);
  CHECK(back.certificates[1].tau == result.certificates[1].tau);
  REQUIRE(back.slacks.size() == 2);
  CHECK(back.slacks[0].X == result.slacks[0].X);
  CHECK(back.slacks[1].eps_bar == result.slacks[1].eps_bar);
  CHECK(back.initial_weight == result.initial_weight);
  // stored verification is advisory only and must be re-derived
  CHECK(!back.verification.ok);
}

TEST_CASE("gamma search reports expose their witness for reloading") {
  GammaSearchResult search;
  search.feasible = true;
  search.gamma_min = 2.5;
  search.best = sample_result();
  search.probes.push_back({5.0, true});
  search.probes.push_back({2.5, true});
  search.monotonicity.push_back({3.75, true});

  const Json j = to_json(search);
  CHECK(j.at("gamma_min") == 2.5);
  CHECK(j.at("probes").size() == 2);
  CHECK(j.at("monotone_on_probes") == true);
  const SynthesisResult back = synthesis_result_from_json(j, "(report)");
  CHECK(back.gamma == search.best.gamma);
  CHECK(back.gains[0].K == search.best.gains[0].K);
}

TEST_CASE("gain sets load from bare arrays and from full reports") {
  const SynthesisResult result = sample_result();
  const std::vector<NodeGains> bare =
      gains_from_json(to_json(result.gains), "gains");
  REQUIRE(bare.size() == 2);
  CHECK(bare[0].K == result.gains[0].K);
  CHECK(bare[1].L == result.gains[1].L);

  const std::vector<NodeGains> nested =
      gains_from_json(to_json(result), "report");
  CHECK(nested[1].K == result.gains[1].K);

  CHECK_THROWS_AS(gains_from_json(Json::parse("{\"x\": 1}"), "report"),
                  ConfigError);
  CHECK_THROWS_AS(gains_from_json(Json::array(), "report"), ConfigError);
}

TEST_CASE("config files load from disk or fail loudly") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rrhoc_config_test";
  fs::create_directories(dir);

  const fs::path good = dir / "good.json";
  std::ofstream(good) << minimal_config().dump(2);
  const ToolConfig cfg = load_config(good);
  CHECK(cfg.nodes.size() == 2);

  CHECK_THROWS_WITH_AS(load_config(dir / "absent.json"),
                       doctest::Contains("cannot open config file"),
                       ConfigError);

  const fs::path broken = dir / "broken.json";
  std::ofstream(broken) << "{ not json";
  CHECK_THROWS_AS(load_config(broken), ConfigError);
  fs::remove_all(dir);
}

} // TEST_SUITE
