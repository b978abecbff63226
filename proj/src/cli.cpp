#include "rrhoc/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "rrhoc/certification.hpp"
#include "rrhoc/config.hpp"
#include "rrhoc/observer.hpp"
#include "rrhoc/synthesis.hpp"

namespace rrhoc {
namespace {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

LogLevel g_log_level = LogLevel::Info;

void log_line(LogLevel level, const std::string& message) {
  if (level > g_log_level) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << message
            << "\n";
}

LogLevel parse_log_level(const std::string& name) {
  static const std::map<std::string, LogLevel> levels = {
      {"error", LogLevel::Error},
      {"warn", LogLevel::Warn},
      {"info", LogLevel::Info},
      {"debug", LogLevel::Debug}};
  auto it = levels.find(name);
  if (it == levels.end())
    throw ConfigError("unknown log level: " + name +
                      " (expected error|warn|info|debug)");
  return it->second;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
  log_line(LogLevel::Info, "wrote " + path.string());
}

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ConfigError(path.string() + ": " + ex.what());
  }
}

struct Session {
  ToolConfig cfg;
  NetworkModel model;
  DirectedGraph graph;
  SamplingSchedule schedule;
  std::filesystem::path out_dir;
};

Session open_session(const CliOptions& options) {
  ToolConfig cfg = load_config(options.config_path);
  if (options.seed) {
    cfg.seed = *options.seed;
    cfg.battery.seed = *options.seed;
  }
  std::filesystem::path out =
      options.out_dir.empty() ? std::filesystem::path(cfg.out_dir)
                              : options.out_dir;
  std::filesystem::create_directories(out);
  NetworkModel model = cfg.make_model();
  DirectedGraph graph = cfg.make_graph();
  SamplingSchedule schedule = cfg.make_schedule();
  return Session{std::move(cfg), std::move(model), std::move(graph),
                 std::move(schedule), std::move(out)};
}

/// Loads a witness report and replaces its stored verification with a
/// fresh eigenvalue re-check against this session's model.
SynthesisResult load_witness(const Session& s,
                             const std::filesystem::path& path) {
  SynthesisResult witness =
      synthesis_result_from_json(load_json(path), "(witness)");
  if (!witness.feasible)
    throw ConfigError(path.string() + ": witness is marked infeasible");
  witness.verification = recheck_witness(s.model, s.graph,
                                         witness.certificates, witness.slacks,
                                         witness.gains, witness.gamma);
  log_line(witness.verification.ok ? LogLevel::Info : LogLevel::Warn,
           std::string("witness re-check: ") +
               (witness.verification.ok ? "ok" : "FAILED"));
  return witness;
}

int cmd_synthesize(const Session& s) {
  if (s.cfg.fixed_gamma) {
    log_line(LogLevel::Info,
             "synthesizing at fixed gamma " + std::to_string(*s.cfg.fixed_gamma));
    SynthesisResult result = synthesize(s.model, s.graph, s.schedule,
                                        *s.cfg.fixed_gamma, s.cfg.synthesis);
    write_json(s.out_dir / "synthesis.json", to_json(result));
    if (!result.feasible) {
      log_line(LogLevel::Warn, "no feasible witness within budget");
      return kExitBudgetExhausted;
    }
    return kExitOk;
  }
  log_line(LogLevel::Info, "bisecting gamma");
  GammaSearchResult result =
      minimize_gamma(s.model, s.graph, s.schedule, s.cfg.synthesis,
                     s.cfg.bisection);
  write_json(s.out_dir / "synthesis.json", to_json(result));
  for (const ProbeRecord& p : result.probes) {
    log_line(LogLevel::Debug, "probe gamma=" + std::to_string(p.gamma) +
                                  (p.feasible ? " feasible" : " infeasible"));
  }
  if (!result.feasible) {
    log_line(LogLevel::Warn, "no feasible gamma below the cap");
    return kExitBudgetExhausted;
  }
  log_line(LogLevel::Info, "gamma_min = " + std::to_string(result.gamma_min));
  return kExitOk;
}

int cmd_analyze(const Session& s, const CliOptions& options) {
  if (options.gains_path.empty())
    throw ConfigError("analyze needs --gains <synthesis report>");
  SynthesisResult witness = load_witness(s, options.gains_path);
  const double gamma = s.cfg.fixed_gamma.value_or(witness.gamma);
  AnalysisResult result = analyze_gains(s.model, s.graph, s.schedule,
                                        witness.gains, gamma,
                                        s.cfg.synthesis);
  write_json(s.out_dir / "analysis.json", to_json(result));
  if (!result.feasible) {
    log_line(LogLevel::Warn, "no certificate found for the given gains");
    return kExitBudgetExhausted;
  }
  return kExitOk;
}

int cmd_simulate(const Session& s, const CliOptions& options) {
  if (options.gains_path.empty())
    throw ConfigError("simulate needs --gains <synthesis report>");
  SynthesisResult witness = load_witness(s, options.gains_path);
  const std::vector<NetworkDisturbance> battery =
      make_battery(s.model, s.schedule, s.cfg.battery);
  const NetworkDisturbance* scenario = nullptr;
  for (const NetworkDisturbance& d : battery) {
    if (d.name == options.scenario) scenario = &d;
  }
  if (scenario == nullptr) {
    std::string names;
    for (const NetworkDisturbance& d : battery) names += " " + d.name;
    throw ConfigError("unknown scenario `" + options.scenario +
                      "`; battery has:" + names);
  }
  SimulationTrace trace = simulate(s.model, s.graph, s.schedule,
                                   witness.gains, *scenario, s.cfg.dt);
  write_trace_csv(trace, s.out_dir / "trace.csv");
  log_line(LogLevel::Info, "wrote " + (s.out_dir / "trace.csv").string());
  return kExitOk;
}

int cmd_certify(const Session& s, const CliOptions& options) {
  SynthesisResult witness;
  if (!options.gains_path.empty()) {
    witness = load_witness(s, options.gains_path);
  } else if (s.cfg.fixed_gamma) {
    witness = synthesize(s.model, s.graph, s.schedule, *s.cfg.fixed_gamma,
                         s.cfg.synthesis);
    if (!witness.feasible) {
      log_line(LogLevel::Warn, "no feasible witness within budget");
      return kExitBudgetExhausted;
    }
  } else {
    GammaSearchResult search = minimize_gamma(s.model, s.graph, s.schedule,
                                              s.cfg.synthesis, s.cfg.bisection);
    if (!search.feasible) {
      log_line(LogLevel::Warn, "no feasible gamma below the cap");
      return kExitBudgetExhausted;
    }
    log_line(LogLevel::Info, "gamma_min = " + std::to_string(search.gamma_min));
    witness = std::move(search.best);
  }
  const std::vector<NetworkDisturbance> battery =
      make_battery(s.model, s.schedule, s.cfg.battery);
  CertificationReport report = certify(s.model, s.graph, s.schedule, witness,
                                       battery, s.cfg.certify);
  write_json(s.out_dir / "certification.json", to_json(report));
  log_line(LogLevel::Info, report.statement);
  return report.pass ? kExitOk : kExitFail;
}

int cmd_sweep(const Session& s) {
  if (s.cfg.sweep_steps.empty())
    throw ConfigError("sweep needs a `sweep.steps` list in the config");
  if (!s.cfg.uniform_schedule)
    throw ConfigError("sweep needs a uniform schedule (step + horizon)");
  const std::filesystem::path path = s.out_dir / "sweep.csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "h,gamma_min,feasible\n";
  bool all_feasible = true;
  for (double h : s.cfg.sweep_steps) {
    log_line(LogLevel::Info, "sweep step h = " + std::to_string(h));
    SamplingSchedule schedule = s.cfg.make_schedule(h);
    GammaSearchResult result = minimize_gamma(s.model, s.graph, schedule,
                                              s.cfg.synthesis, s.cfg.bisection);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", h);
    out << buf << ",";
    std::snprintf(buf, sizeof buf, "%.17g",
                  result.feasible ? result.gamma_min : -1.0);
    out << buf << "," << (result.feasible ? 1 : 0) << "\n";
    if (result.feasible) {
      log_line(LogLevel::Info,
               "gamma_min(" + std::to_string(h) +
                   ") = " + std::to_string(result.gamma_min));
    } else {
      all_feasible = false;
    }
  }
  out.close();
  log_line(LogLevel::Info, "wrote " + path.string());
  return all_feasible ? kExitOk : kExitBudgetExhausted;
}

} // namespace

int run_cli(const CliOptions& options) {
  try {
    g_log_level = parse_log_level(options.log_level);
    set_solver_log_sink([](const std::string& line) {
      log_line(LogLevel::Debug, line);
    });
    Session session = open_session(options);
    if (options.command == "synthesize") return cmd_synthesize(session);
    if (options.command == "analyze") return cmd_analyze(session, options);
    if (options.command == "simulate") return cmd_simulate(session, options);
    if (options.command == "certify") return cmd_certify(session, options);
    if (options.command == "sweep") return cmd_sweep(session);
    log_line(LogLevel::Error, "unknown command: " + options.command);
    return kExitInvalidInput;
  } catch (const std::exception& ex) {
    log_line(LogLevel::Error, ex.what());
    return kExitInvalidInput;
  }
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"observer-network synthesis and certification"};
  app.require_subcommand(1);

  CliOptions options;
  std::string config;
  std::string out;
  std::string gains;
  std::uint64_t seed = 0;
  bool seed_set = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "config file (JSON)")->required();
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--seed", seed, "seed override")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    cmd->add_option("--log-level", options.log_level,
                    "error|warn|info|debug");
    return cmd;
  };

  add_common(app.add_subcommand("synthesize",
                                "find gains and certificates (gamma fixed "
                                "or bisected)"));
  CLI::App* analyze = add_common(
      app.add_subcommand("analyze", "certify a fixed gain set"));
  analyze->add_option("--gains", gains, "witness report")->required();
  CLI::App* simulate = add_common(
      app.add_subcommand("simulate", "integrate one battery scenario"));
  simulate->add_option("--gains", gains, "witness report")->required();
  simulate->add_option("--scenario", options.scenario,
                       "battery scenario name");
  CLI::App* certify = add_common(
      app.add_subcommand("certify", "run the full certification battery"));
  certify->add_option("--gains", gains,
                      "witness report (otherwise synthesized here)");
  add_common(app.add_subcommand("sweep", "gamma_min versus sampling step"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }

  options.command = app.get_subcommands().front()->get_name();
  options.config_path = config;
  options.out_dir = out;
  options.gains_path = gains;
  if (seed_set) options.seed = seed;
  return run_cli(options);
}

} // namespace rrhoc
