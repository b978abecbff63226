#include <optional>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rrhoc/certification.hpp"
#include "rrhoc/cli.hpp"
#include "rrhoc/config.hpp"
#include "rrhoc/graph.hpp"
#include "rrhoc/observer.hpp"
#include "rrhoc/schedule.hpp"
#include "rrhoc/synthesis.hpp"

namespace py = pybind11;

namespace {

rrhoc::ToolConfig config_from_text(const std::string& text) {
  return rrhoc::parse_config(rrhoc::Json::parse(text));
}

std::string synthesize_json(const std::string& config_text) {
  rrhoc::ToolConfig cfg = config_from_text(config_text);
  const rrhoc::NetworkModel model = cfg.make_model();
  const rrhoc::DirectedGraph graph = cfg.make_graph();
  const rrhoc::SamplingSchedule schedule = cfg.make_schedule();
  if (cfg.fixed_gamma) {
    return rrhoc::to_json(rrhoc::synthesize(model, graph, schedule,
                                            *cfg.fixed_gamma, cfg.synthesis))
        .dump(2);
  }
  return rrhoc::to_json(rrhoc::minimize_gamma(model, graph, schedule,
                                              cfg.synthesis, cfg.bisection))
      .dump(2);
}

std::string analyze_json(const std::string& config_text,
                         const std::string& witness_text) {
  rrhoc::ToolConfig cfg = config_from_text(config_text);
  const rrhoc::NetworkModel model = cfg.make_model();
  const rrhoc::DirectedGraph graph = cfg.make_graph();
  const rrhoc::SamplingSchedule schedule = cfg.make_schedule();
  rrhoc::SynthesisResult witness = rrhoc::synthesis_result_from_json(
      rrhoc::Json::parse(witness_text), "(witness)");
  const double gamma = cfg.fixed_gamma.value_or(witness.gamma);
  return rrhoc::to_json(rrhoc::analyze_gains(model, graph, schedule,
                                             witness.gains, gamma,
                                             cfg.synthesis))
      .dump(2);
}

std::string certify_json(const std::string& config_text,
                         const std::string& witness_text) {
  rrhoc::ToolConfig cfg = config_from_text(config_text);
  const rrhoc::NetworkModel model = cfg.make_model();
  const rrhoc::DirectedGraph graph = cfg.make_graph();
  const rrhoc::SamplingSchedule schedule = cfg.make_schedule();
  rrhoc::SynthesisResult witness;
  if (!witness_text.empty()) {
    witness = rrhoc::synthesis_result_from_json(
        rrhoc::Json::parse(witness_text), "(witness)");
    witness.verification =
        rrhoc::recheck_witness(model, graph, witness.certificates,
                               witness.slacks, witness.gains, witness.gamma);
  } else if (cfg.fixed_gamma) {
    witness = rrhoc::synthesize(model, graph, schedule, *cfg.fixed_gamma,
                                cfg.synthesis);
  } else {
    rrhoc::GammaSearchResult search = rrhoc::minimize_gamma(
        model, graph, schedule, cfg.synthesis, cfg.bisection);
    if (!search.feasible) {
      throw std::runtime_error("no feasible gamma below the cap");
    }
    witness = std::move(search.best);
  }
  if (!witness.feasible) {
    throw std::runtime_error("no feasible witness within budget");
  }
  const std::vector<rrhoc::NetworkDisturbance> battery =
      rrhoc::make_battery(model, schedule, cfg.battery);
  return rrhoc::to_json(rrhoc::certify(model, graph, schedule, witness,
                                       battery, cfg.certify))
      .dump(2);
}

int run_command(const std::string& command, const std::string& config_path,
                const std::string& out_dir, const std::string& gains_path,
                const std::string& scenario,
                std::optional<std::uint64_t> seed,
                const std::string& log_level) {
  rrhoc::CliOptions options;
  options.command = command;
  options.config_path = config_path;
  options.out_dir = out_dir;
  options.gains_path = gains_path;
  options.scenario = scenario;
  options.seed = seed;
  options.log_level = log_level;
  return rrhoc::run_cli(options);
}

} // namespace

PYBIND11_MODULE(_rrhoc, m) {
  m.doc() = "observer-network synthesis and certification core";

  m.def("synthesize_json", &synthesize_json, py::arg("config"),
        "Run gain synthesis (fixed gamma or bisection) on a JSON config "
        "string; returns the report as a JSON string.");
  m.def("analyze_json", &analyze_json, py::arg("config"), py::arg("witness"),
        "Search certificates for a fixed gain set; returns JSON.");
  m.def("certify_json", &certify_json, py::arg("config"),
        py::arg("witness") = std::string(),
        "Run the certification battery; returns the report as JSON.");
  m.def("run", &run_command, py::arg("command"), py::arg("config"),
        py::arg("out") = std::string("."), py::arg("gains") = std::string(),
        py::arg("scenario") = std::string("undisturbed"),
        py::arg("seed") = std::nullopt,
        py::arg("log_level") = std::string("warn"),
        "File-based front end; mirrors the command-line tool and returns "
        "its exit code.");

  m.def(
      "uniform_max_delay",
      [](double step, double horizon, int in_degree) {
        return rrhoc::SamplingSchedule::uniform(step, horizon)
            .node_max_delay(in_degree);
      },
      py::arg("step"), py::arg("horizon"), py::arg("in_degree"),
      "Worst-case age of the oldest held sample for a node with the given "
      "in-degree under uniform sampling.");
  m.def(
      "rotate_round_robin",
      [](std::vector<int> order, long k) {
        if (order.empty()) {
          throw std::invalid_argument("order must be nonempty");
        }
        const long p = static_cast<long>(order.size());
        const long shifts = ((k % p) + p) % p;
        for (long j = 0; j < shifts; ++j) {
          order = rrhoc::shift_permutation(order);
        }
        return order;
      },
      py::arg("order"), py::arg("k"),
      "Polling order after k sampling instants (k cyclic shifts).");
}
