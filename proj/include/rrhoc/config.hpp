#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rrhoc/certification.hpp"
#include "rrhoc/graph.hpp"
#include "rrhoc/plant.hpp"
#include "rrhoc/schedule.hpp"
#include "rrhoc/synthesis.hpp"

namespace rrhoc {

using Json = nlohmann::ordered_json;

/// Schema violation; the message always names the offending field path.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ToolConfig {
  PlantModel plant;
  std::vector<NodeMeasurement> nodes;
  std::vector<DirectedGraph::Edge> edges;
  bool uniform_schedule = true;
  double step = 0.0;
  double horizon = 0.0;
  std::vector<double> times;

  std::optional<double> fixed_gamma;
  BisectionOptions bisection;
  SynthesisOptions synthesis;
  BatteryOptions battery;
  CertifyOptions certify;
  double dt = 1e-3;
  std::uint64_t seed = 1;
  std::vector<double> sweep_steps;
  std::string out_dir = ".";

  NetworkModel make_model() const;
  DirectedGraph make_graph() const;
  SamplingSchedule make_schedule() const;
  /// Schedule with the uniform step replaced (sweep command).
  SamplingSchedule make_schedule(double override_step) const;
};

/// Parses and cross-validates a config document. Throws ConfigError with
/// a field path on any violation.
ToolConfig parse_config(const Json& j);
ToolConfig load_config(const std::filesystem::path& path);

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& path);
Eigen::VectorXd vector_from_json(const Json& j, const std::string& path);
Json matrix_to_json(const Eigen::MatrixXd& m);
Json vector_to_json(const Eigen::VectorXd& v);

Json to_json(const VerifyReport& report);
Json to_json(const std::vector<AttemptRecord>& attempts);
Json to_json(const std::vector<NodeGains>& gains);
Json to_json(const std::vector<NodeCertificates>& certs);
Json to_json(const SynthesisResult& result);
Json to_json(const GammaSearchResult& result);
Json to_json(const AnalysisResult& result);
Json to_json(const CertificationReport& report);

/// Reads a gain set from a report produced by `synthesize` (either the
/// bare gains array or a full result object containing one).
std::vector<NodeGains> gains_from_json(const Json& j, const std::string& path);

/// Reads a full synthesis witness back from a report written by to_json.
/// Accepts either a bare result object or a gamma-search report (uses its
/// `witness`). The stored verification is discarded; callers re-check.
SynthesisResult synthesis_result_from_json(const Json& j,
                                           const std::string& path);

} // namespace rrhoc
