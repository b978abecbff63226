#include "rrhoc/config.hpp"

#include <fstream>
#include <sstream>

#include "rrhoc/lmi_solver.hpp"

namespace rrhoc {
namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

const Json& require(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) fail(path + "." + key, "missing required field");
  return *it;
}

const Json* optional(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double as_number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::uint64_t as_u64(const Json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !j.is_number_integer())
    fail(path, "expected a nonnegative integer");
  if (j.is_number_integer() && j.get<long long>() < 0)
    fail(path, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

std::vector<double> as_number_list(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    out.push_back(as_number(j[k], path + "[" + std::to_string(k) + "]"));
  }
  return out;
}

void check_known_keys(const Json& j, const std::string& path,
                      std::initializer_list<const char*> known) {
  if (!j.is_object()) return;
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool found = false;
    for (const char* k : known)
      if (it.key() == k) found = true;
    if (!found) fail(path + "." + it.key(), "unknown field");
  }
}

} // namespace

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a matrix (array of row arrays)");
  const std::size_t rows = j.size();
  if (rows == 0) return Eigen::MatrixXd(0, 0);
  if (!j[0].is_array()) fail(path + "[0]", "expected a row array");
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array()) fail(row_path, "expected a row array");
    if (j[r].size() != cols)
      fail(row_path, "ragged matrix: expected " + std::to_string(cols) +
                         " entries, got " + std::to_string(j[r].size()));
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(j[r][c], row_path + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) =
        as_number(j[k], path + "[" + std::to_string(k) + "]");
  }
  return v;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

namespace {

PlantModel parse_plant(const Json& j) {
  check_known_keys(j, "plant", {"A", "B", "x0"});
  PlantModel plant;
  plant.A = matrix_from_json(require(j, "A", "plant"), "plant.A");
  if (plant.A.rows() == 0 || plant.A.rows() != plant.A.cols())
    fail("plant.A", "expected a nonempty square matrix");
  const int n = static_cast<int>(plant.A.rows());
  if (const Json* b = optional(j, "B", "plant")) {
    plant.B2 = matrix_from_json(*b, "plant.B");
    if (plant.B2.rows() != n)
      fail("plant.B", "expected " + std::to_string(n) +
                          " rows to match plant.A");
  } else {
    plant.B2 = Eigen::MatrixXd(n, 0);
  }
  if (const Json* x0 = optional(j, "x0", "plant")) {
    plant.x0 = vector_from_json(*x0, "plant.x0");
    if (plant.x0.size() != n)
      fail("plant.x0", "expected " + std::to_string(n) +
                           " entries to match plant.A");
  }
  return plant;
}

NodeMeasurement parse_node(const Json& j, int n, int m_w,
                           const std::string& path) {
  check_known_keys(j, path, {"C", "D", "Dbar", "H"});
  NodeMeasurement node;
  node.C = matrix_from_json(require(j, "C", path), path + ".C");
  if (node.C.rows() == 0) fail(path + ".C", "expected at least one row");
  if (node.C.cols() != n)
    fail(path + ".C", "expected " + std::to_string(n) +
                          " columns to match plant.A");
  const int r = static_cast<int>(node.C.rows());
  if (const Json* d = optional(j, "D", path)) {
    node.D2 = matrix_from_json(*d, path + ".D");
    if (node.D2.rows() != r || node.D2.cols() != m_w)
      fail(path + ".D", "expected " + std::to_string(r) + "x" +
                            std::to_string(m_w) +
                            " to match C rows and plant.B columns");
  } else {
    node.D2 = Eigen::MatrixXd::Zero(r, m_w);
  }
  if (const Json* d = optional(j, "Dbar", path)) {
    node.Dbar2 = matrix_from_json(*d, path + ".Dbar");
    if (node.Dbar2.rows() != r)
      fail(path + ".Dbar", "expected " + std::to_string(r) +
                               " rows to match C");
  } else {
    node.Dbar2 = Eigen::MatrixXd(r, 0);
  }
  if (const Json* h = optional(j, "H", path)) {
    node.H = matrix_from_json(*h, path + ".H");
    if (node.H.cols() != n)
      fail(path + ".H", "expected " + std::to_string(n) +
                            " columns to match plant.A");
    if (node.H.rows() == 0) fail(path + ".H", "expected at least one row");
  } else {
    node.H = Eigen::MatrixXd::Identity(n, n);
  }
  return node;
}

} // namespace

ToolConfig parse_config(const Json& j) {
  if (!j.is_object()) fail("(root)", "expected a JSON object");
  check_known_keys(j, "(root)",
                   {"plant", "nodes", "graph", "schedule", "gamma", "grid",
                    "solver", "battery", "certify", "dt", "seed", "sweep",
                    "out"});
  ToolConfig cfg;
  cfg.plant = parse_plant(require(j, "plant", "(root)"));
  const int n = cfg.plant.n();
  const int m_w = cfg.plant.m_w();

  const Json& nodes = require(j, "nodes", "(root)");
  if (!nodes.is_array() || nodes.empty())
    fail("nodes", "expected a nonempty array of node objects");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    cfg.nodes.push_back(parse_node(nodes[k], n, m_w,
                                   "nodes[" + std::to_string(k) + "]"));
  }
  const int node_count = static_cast<int>(cfg.nodes.size());

  const Json& graph = require(j, "graph", "(root)");
  check_known_keys(graph, "graph", {"edges"});
  const Json& edges = require(graph, "edges", "graph");
  if (!edges.is_array()) fail("graph.edges", "expected an array of pairs");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const std::string path = "graph.edges[" + std::to_string(k) + "]";
    if (!edges[k].is_array() || edges[k].size() != 2)
      fail(path, "expected a [source, target] pair");
    const int s = as_int(edges[k][0], path + "[0]");
    const int t = as_int(edges[k][1], path + "[1]");
    if (s < 1 || s > node_count || t < 1 || t > node_count)
      fail(path, "node ids must lie in 1.." + std::to_string(node_count));
    cfg.edges.emplace_back(s, t);
  }

  const Json& schedule = require(j, "schedule", "(root)");
  check_known_keys(schedule, "schedule", {"step", "horizon", "times"});
  if (const Json* times = optional(schedule, "times", "schedule")) {
    cfg.uniform_schedule = false;
    cfg.times = as_number_list(*times, "schedule.times");
    if (cfg.times.size() < 2)
      fail("schedule.times", "expected at least two instants");
  } else {
    cfg.step = as_number(require(schedule, "step", "schedule"),
                         "schedule.step");
    cfg.horizon = as_number(require(schedule, "horizon", "schedule"),
                            "schedule.horizon");
    if (!(cfg.step > 0.0)) fail("schedule.step", "expected a positive number");
    if (!(cfg.horizon > cfg.step))
      fail("schedule.horizon", "expected horizon > step");
  }

  if (const Json* gamma = optional(j, "gamma", "(root)")) {
    check_known_keys(*gamma, "gamma", {"fixed", "bisection"});
    const Json* fixed = optional(*gamma, "fixed", "gamma");
    const Json* bis = optional(*gamma, "bisection", "gamma");
    if ((fixed != nullptr) == (bis != nullptr))
      fail("gamma", "expected exactly one of `fixed` or `bisection`");
    if (fixed) {
      const double g = as_number(*fixed, "gamma.fixed");
      if (!(g > 0.0)) fail("gamma.fixed", "expected a positive number");
      cfg.fixed_gamma = g;
    } else {
      check_known_keys(*bis, "gamma.bisection", {"init", "tolerance", "cap"});
      if (const Json* v = optional(*bis, "init", "gamma.bisection"))
        cfg.bisection.gamma_init = as_number(*v, "gamma.bisection.init");
      if (const Json* v = optional(*bis, "tolerance", "gamma.bisection"))
        cfg.bisection.tol = as_number(*v, "gamma.bisection.tolerance");
      if (const Json* v = optional(*bis, "cap", "gamma.bisection"))
        cfg.bisection.gamma_cap = as_number(*v, "gamma.bisection.cap");
      if (!(cfg.bisection.gamma_init > 0.0))
        fail("gamma.bisection.init", "expected a positive number");
      if (!(cfg.bisection.tol > 0.0))
        fail("gamma.bisection.tolerance", "expected a positive number");
      if (!(cfg.bisection.gamma_cap >= cfg.bisection.gamma_init))
        fail("gamma.bisection.cap", "expected cap >= init");
    }
  }

  if (const Json* grid = optional(j, "grid", "(root)")) {
    check_known_keys(*grid, "grid", {"alpha", "coupling_fraction", "eps"});
    if (const Json* v = optional(*grid, "alpha", "grid")) {
      cfg.synthesis.alpha_grid = as_number_list(*v, "grid.alpha");
      if (cfg.synthesis.alpha_grid.empty())
        fail("grid.alpha", "expected a nonempty list");
      for (std::size_t k = 0; k < cfg.synthesis.alpha_grid.size(); ++k)
        if (!(cfg.synthesis.alpha_grid[k] > 0.0))
          fail("grid.alpha[" + std::to_string(k) + "]",
               "expected a positive number");
    }
    if (const Json* v = optional(*grid, "coupling_fraction", "grid")) {
      cfg.synthesis.pi_fraction_grid =
          as_number_list(*v, "grid.coupling_fraction");
      if (cfg.synthesis.pi_fraction_grid.empty())
        fail("grid.coupling_fraction", "expected a nonempty list");
      for (std::size_t k = 0; k < cfg.synthesis.pi_fraction_grid.size(); ++k) {
        const double c = cfg.synthesis.pi_fraction_grid[k];
        if (!(c >= 0.0) || c >= 1.0)
          fail("grid.coupling_fraction[" + std::to_string(k) + "]",
               "expected a fraction in [0, 1)");
      }
    }
    if (const Json* v = optional(*grid, "eps", "grid")) {
      cfg.synthesis.eps_grid = as_number_list(*v, "grid.eps");
      if (cfg.synthesis.eps_grid.empty())
        fail("grid.eps", "expected a nonempty list");
      for (std::size_t k = 0; k < cfg.synthesis.eps_grid.size(); ++k)
        if (!(cfg.synthesis.eps_grid[k] > 0.0))
          fail("grid.eps[" + std::to_string(k) + "]",
               "expected a positive number");
    }
  }

  if (const Json* solver = optional(j, "solver", "(root)")) {
    check_known_keys(*solver, "solver", {"max_iterations", "stall_window"});
    if (const Json* v = optional(*solver, "max_iterations", "solver")) {
      const int it = as_int(*v, "solver.max_iterations");
      if (it < 1) fail("solver.max_iterations", "expected a positive integer");
      cfg.synthesis.budget.max_iterations = it;
    }
    if (const Json* v = optional(*solver, "stall_window", "solver")) {
      const int wdw = as_int(*v, "solver.stall_window");
      if (wdw < 2) fail("solver.stall_window", "expected an integer >= 2");
      cfg.synthesis.budget.stall_window = wdw;
    }
  }

  if (const Json* battery = optional(j, "battery", "(root)")) {
    check_known_keys(*battery, "battery",
                     {"count", "amplitude", "support_fraction", "piece_step"});
    if (const Json* v = optional(*battery, "count", "battery")) {
      cfg.battery.scenario_count = as_int(*v, "battery.count");
      if (cfg.battery.scenario_count < 1)
        fail("battery.count", "expected a positive integer");
    }
    if (const Json* v = optional(*battery, "amplitude", "battery")) {
      cfg.battery.amplitude = as_number(*v, "battery.amplitude");
      if (!(cfg.battery.amplitude > 0.0))
        fail("battery.amplitude", "expected a positive number");
    }
    if (const Json* v = optional(*battery, "support_fraction", "battery")) {
      cfg.battery.support_fraction =
          as_number(*v, "battery.support_fraction");
      if (!(cfg.battery.support_fraction > 0.0) ||
          cfg.battery.support_fraction > 1.0)
        fail("battery.support_fraction", "expected a fraction in (0, 1]");
    }
    if (const Json* v = optional(*battery, "piece_step", "battery")) {
      cfg.battery.piece_step = as_number(*v, "battery.piece_step");
      if (!(cfg.battery.piece_step > 0.0))
        fail("battery.piece_step", "expected a positive number");
    }
  }

  if (const Json* certify = optional(j, "certify", "(root)")) {
    check_known_keys(*certify, "certify",
                     {"ratio_tolerance", "lyapunov_tolerance", "checks"});
    if (const Json* v = optional(*certify, "ratio_tolerance", "certify")) {
      cfg.certify.ratio_tolerance = as_number(*v, "certify.ratio_tolerance");
      if (!(cfg.certify.ratio_tolerance >= 0.0))
        fail("certify.ratio_tolerance", "expected a nonnegative number");
    }
    if (const Json* v = optional(*certify, "lyapunov_tolerance", "certify")) {
      cfg.certify.lyapunov_tolerance =
          as_number(*v, "certify.lyapunov_tolerance");
      if (!(cfg.certify.lyapunov_tolerance > 0.0))
        fail("certify.lyapunov_tolerance", "expected a positive number");
    }
    if (const Json* v = optional(*certify, "checks", "certify")) {
      cfg.certify.lyapunov_check_count = as_int(*v, "certify.checks");
      if (cfg.certify.lyapunov_check_count < 0)
        fail("certify.checks", "expected a nonnegative integer");
    }
  }

  if (const Json* dt = optional(j, "dt", "(root)")) {
    cfg.dt = as_number(*dt, "dt");
    if (!(cfg.dt > 0.0)) fail("dt", "expected a positive number");
  }
  if (const Json* seed = optional(j, "seed", "(root)")) {
    cfg.seed = as_u64(*seed, "seed");
  }
  cfg.battery.seed = cfg.seed;

  if (const Json* out = optional(j, "out", "(root)")) {
    if (!out->is_string()) fail("out", "expected a directory path string");
    cfg.out_dir = out->get<std::string>();
  }

  if (const Json* sweep = optional(j, "sweep", "(root)")) {
    check_known_keys(*sweep, "sweep", {"steps"});
    cfg.sweep_steps = as_number_list(require(*sweep, "steps", "sweep"),
                                     "sweep.steps");
    if (cfg.sweep_steps.empty())
      fail("sweep.steps", "expected a nonempty list");
    for (std::size_t k = 0; k < cfg.sweep_steps.size(); ++k)
      if (!(cfg.sweep_steps[k] > 0.0))
        fail("sweep.steps[" + std::to_string(k) + "]",
             "expected a positive number");
  }

  // Constructor-level validation with config-flavoured error wrapping.
  try {
    cfg.make_model();
    cfg.make_graph();
    cfg.make_schedule();
  } catch (const std::exception& ex) {
    fail("(root)", std::string("cross-validation failed: ") + ex.what());
  }
  return cfg;
}

ToolConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
  return parse_config(j);
}

NetworkModel ToolConfig::make_model() const {
  return NetworkModel(plant, nodes);
}

DirectedGraph ToolConfig::make_graph() const {
  return DirectedGraph(static_cast<int>(nodes.size()), edges);
}

SamplingSchedule ToolConfig::make_schedule() const {
  return uniform_schedule ? SamplingSchedule::uniform(step, horizon)
                          : SamplingSchedule::explicit_times(times);
}

SamplingSchedule ToolConfig::make_schedule(double override_step) const {
  return SamplingSchedule::uniform(override_step, horizon);
}

Json to_json(const VerifyReport& report) {
  Json checks = Json::array();
  for (const ConstraintCheck& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"kind", c.kind == ConstraintKind::NegativeDefinite
                                   ? "negative_definite"
                                   : "positive_semidefinite"},
                      {"eigenvalue", c.eigenvalue},
                      {"bound", c.bound},
                      {"ok", c.ok}});
  }
  return {{"ok", report.ok}, {"checks", std::move(checks)}};
}

Json to_json(const std::vector<AttemptRecord>& attempts) {
  Json out = Json::array();
  for (const AttemptRecord& a : attempts) {
    out.push_back({{"alpha", a.alpha},
                   {"coupling_fraction", a.pi_fraction},
                   {"eps", a.eps},
                   {"status", to_string(a.status)},
                   {"iterations", a.iterations},
                   {"residual", a.residual}});
  }
  return out;
}

Json to_json(const std::vector<NodeGains>& gains) {
  Json out = Json::array();
  for (const NodeGains& g : gains) {
    out.push_back({{"K", matrix_to_json(g.K)}, {"L", matrix_to_json(g.L)}});
  }
  return out;
}

Json to_json(const std::vector<NodeCertificates>& certs) {
  Json out = Json::array();
  for (const NodeCertificates& c : certs) {
    out.push_back({{"Yhat", matrix_to_json(c.Yhat)},
                   {"S", matrix_to_json(c.S)},
                   {"R", matrix_to_json(c.R)},
                   {"W", matrix_to_json(c.W)},
                   {"G", matrix_to_json(c.G)},
                   {"alpha", c.alpha},
                   {"pi", c.pi},
                   {"tau", c.tau}});
  }
  return out;
}

Json to_json(const SynthesisResult& result) {
  Json out;
  out["feasible"] = result.feasible;
  out["gamma"] = result.gamma;
  out["alpha"] = result.alpha;
  out["coupling_fraction"] = result.pi_fraction;
  out["eps"] = result.eps;
  out["gains"] = to_json(result.gains);
  out["certificates"] = to_json(result.certificates);
  Json slacks = Json::array();
  for (const SynthesisSlacks& s : result.slacks) {
    slacks.push_back({{"X", matrix_to_json(s.X)},
                      {"F", matrix_to_json(s.F)},
                      {"U", matrix_to_json(s.U)},
                      {"eps", s.eps},
                      {"eps_bar", s.eps_bar}});
  }
  out["slacks"] = std::move(slacks);
  out["initial_weight"] = matrix_to_json(result.initial_weight);
  out["verification"] = to_json(result.verification);
  out["attempts"] = to_json(result.attempts);
  return out;
}

Json to_json(const GammaSearchResult& result) {
  Json probes = Json::array();
  for (const ProbeRecord& p : result.probes)
    probes.push_back({{"gamma", p.gamma}, {"feasible", p.feasible}});
  Json monotonicity = Json::array();
  for (const ProbeRecord& p : result.monotonicity)
    monotonicity.push_back({{"gamma", p.gamma}, {"feasible", p.feasible}});
  Json out;
  out["feasible"] = result.feasible;
  out["gamma_min"] = result.gamma_min;
  out["witness"] = to_json(result.best);
  out["probes"] = std::move(probes);
  out["monotonicity"] = std::move(monotonicity);
  out["monotone_on_probes"] = result.monotone_on_probes;
  return out;
}

Json to_json(const AnalysisResult& result) {
  Json out;
  out["feasible"] = result.feasible;
  out["gamma"] = result.gamma;
  out["alpha"] = result.alpha;
  out["coupling_fraction"] = result.pi_fraction;
  out["certificates"] = to_json(result.certificates);
  out["initial_weight"] = matrix_to_json(result.initial_weight);
  out["verification"] = to_json(result.verification);
  out["attempts"] = to_json(result.attempts);
  return out;
}

Json to_json(const CertificationReport& report) {
  Json scenarios = Json::array();
  for (const ScenarioResult& s : report.scenarios) {
    scenarios.push_back({{"name", s.name},
                         {"cost", s.cost},
                         {"denominator", s.denominator},
                         {"ratio", s.ratio},
                         {"ratio_bound", s.ratio_bound},
                         {"ratio_ok", s.ratio_ok},
                         {"horizon_ok", s.horizon_ok},
                         {"disturbance_energy", s.disturbance_energy}});
  }
  Json lyapunov_samples = Json::array();
  for (const LyapunovSample& s : report.lyapunov.samples) {
    lyapunov_samples.push_back({{"time", s.time},
                                {"node", s.node},
                                {"lhs", s.lhs},
                                {"scale", s.scale},
                                {"normalized", s.normalized},
                                {"functional", s.functional},
                                {"fd_derivative", s.fd_derivative},
                                {"analytic_derivative", s.analytic_derivative}});
  }
  Json out;
  out["gamma"] = report.gamma;
  out["initial_weight"] = matrix_to_json(report.initial_weight);
  out["scenarios"] = std::move(scenarios);
  out["decay_rate"] = report.decay_rate;
  out["final_error_ratio"] = report.final_error_ratio;
  out["stability_pass"] = report.stability_pass;
  out["ratio_tolerance"] = report.ratio_tolerance;
  out["ratio_pass"] = report.ratio_pass;
  out["horizon_pass"] = report.horizon_pass;
  out["analysis_verified"] = report.analysis_verified;
  out["lyapunov"] = {{"max_normalized", report.lyapunov_max_normalized},
                     {"tolerance", report.lyapunov_tolerance},
                     {"pass", report.lyapunov_pass},
                     {"samples", std::move(lyapunov_samples)}};
  out["pass"] = report.pass;
  out["statement"] = report.statement;
  return out;
}

SynthesisResult synthesis_result_from_json(const Json& j,
                                           const std::string& path) {
  if (!j.is_object()) fail(path, "expected a result object");
  if (j.contains("witness")) {
    return synthesis_result_from_json(j["witness"], path + ".witness");
  }
  SynthesisResult result;
  const Json& feasible = require(j, "feasible", path);
  if (!feasible.is_boolean()) fail(path + ".feasible", "expected a boolean");
  result.feasible = feasible.get<bool>();
  result.gamma = as_number(require(j, "gamma", path), path + ".gamma");
  if (const Json* v = optional(j, "alpha", path))
    result.alpha = as_number(*v, path + ".alpha");
  if (const Json* v = optional(j, "coupling_fraction", path))
    result.pi_fraction = as_number(*v, path + ".coupling_fraction");
  if (const Json* v = optional(j, "eps", path))
    result.eps = as_number(*v, path + ".eps");
  result.gains = gains_from_json(j, path);

  const Json& certs = require(j, "certificates", path);
  if (!certs.is_array() || certs.size() != result.gains.size())
    fail(path + ".certificates", "expected one certificate set per node");
  for (std::size_t k = 0; k < certs.size(); ++k) {
    const std::string cp = path + ".certificates[" + std::to_string(k) + "]";
    NodeCertificates c;
    c.Yhat = matrix_from_json(require(certs[k], "Yhat", cp), cp + ".Yhat");
    c.S = matrix_from_json(require(certs[k], "S", cp), cp + ".S");
    c.R = matrix_from_json(require(certs[k], "R", cp), cp + ".R");
    c.W = matrix_from_json(require(certs[k], "W", cp), cp + ".W");
    c.G = matrix_from_json(require(certs[k], "G", cp), cp + ".G");
    c.alpha = as_number(require(certs[k], "alpha", cp), cp + ".alpha");
    c.pi = as_number(require(certs[k], "pi", cp), cp + ".pi");
    c.tau = as_number(require(certs[k], "tau", cp), cp + ".tau");
    result.certificates.push_back(std::move(c));
  }

  const Json& slacks = require(j, "slacks", path);
  if (!slacks.is_array() || slacks.size() != result.gains.size())
    fail(path + ".slacks", "expected one slack set per node");
  for (std::size_t k = 0; k < slacks.size(); ++k) {
    const std::string sp = path + ".slacks[" + std::to_string(k) + "]";
    SynthesisSlacks s;
    s.X = matrix_from_json(require(slacks[k], "X", sp), sp + ".X");
    s.F = matrix_from_json(require(slacks[k], "F", sp), sp + ".F");
    s.U = matrix_from_json(require(slacks[k], "U", sp), sp + ".U");
    s.eps = as_number(require(slacks[k], "eps", sp), sp + ".eps");
    s.eps_bar = as_number(require(slacks[k], "eps_bar", sp), sp + ".eps_bar");
    result.slacks.push_back(std::move(s));
  }

  result.initial_weight = matrix_from_json(
      require(j, "initial_weight", path), path + ".initial_weight");
  return result;
}

std::vector<NodeGains> gains_from_json(const Json& j,
                                       const std::string& path) {
  const Json* arr = &j;
  std::string base = path;
  if (j.is_object()) {
    auto it = j.find("gains");
    if (it == j.end()) fail(path + ".gains", "missing gains array");
    arr = &*it;
    base = path + ".gains";
  }
  if (!arr->is_array() || arr->empty())
    fail(base, "expected a nonempty array of {K, L} objects");
  std::vector<NodeGains> out;
  for (std::size_t k = 0; k < arr->size(); ++k) {
    const std::string node_path = base + "[" + std::to_string(k) + "]";
    const Json& g = (*arr)[k];
    NodeGains gains;
    gains.K = matrix_from_json(require(g, "K", node_path), node_path + ".K");
    gains.L = matrix_from_json(require(g, "L", node_path), node_path + ".L");
    out.push_back(std::move(gains));
  }
  return out;
}

} // namespace rrhoc
