#pragma once

#include <vector>

#include "rrhoc/lmi_assembly.hpp"
#include "rrhoc/lmi_solver.hpp"

namespace rrhoc {

/// Joint feasibility problem over all nodes for fixed scalar parameters
/// (alpha_i, pi_i, tau_i, eps_i, eps_bar_i) and fixed gamma. Keeps the
/// variable handles needed to unpack a solution.
struct SynthesisProblem {
  LmiProblem problem;
  struct Handles {
    int yhat = -1, s = -1, r = -1, w = -1, g = -1, x = -1, f = -1, u = -1;
  };
  std::vector<Handles> handles;
  std::vector<NodeCertificates> scalars;
  std::vector<double> eps;
  std::vector<double> eps_bar;
  double gamma = 0.0;
};

/// `scalars` must carry alpha, pi and tau per node; the matrix fields are
/// ignored and become decision variables.
SynthesisProblem build_synthesis_problem(const NetworkModel& model,
                                         const DirectedGraph& graph,
                                         std::vector<NodeCertificates> scalars,
                                         std::vector<double> eps,
                                         std::vector<double> eps_bar,
                                         double gamma);

std::vector<NodeCertificates> extract_certificates(const SynthesisProblem& sp,
                                                   const Eigen::VectorXd& x);
std::vector<SynthesisSlacks> extract_synthesis_slacks(
    const SynthesisProblem& sp, const Eigen::VectorXd& x);

/// Same structure with the gains fixed and the multipliers X, Z, Q free.
struct AnalysisProblem {
  LmiProblem problem;
  struct Handles {
    int yhat = -1, s = -1, r = -1, w = -1, g = -1, x = -1, z = -1, q = -1;
  };
  std::vector<Handles> handles;
  std::vector<NodeCertificates> scalars;
  double gamma = 0.0;
};

AnalysisProblem build_analysis_problem(const NetworkModel& model,
                                       const DirectedGraph& graph,
                                       std::vector<NodeCertificates> scalars,
                                       const std::vector<NodeGains>& gains,
                                       double gamma);

std::vector<NodeCertificates> extract_certificates(const AnalysisProblem& ap,
                                                   const Eigen::VectorXd& x);
std::vector<AnalysisSlacks> extract_analysis_slacks(const AnalysisProblem& ap,
                                                    const Eigen::VectorXd& x);

/// Scalar grid shared by synthesis and analysis. pi fractions scale the
/// open upper bound 2 alpha / q_i; every fraction must lie in [0, 1).
struct SynthesisOptions {
  std::vector<double> alpha_grid{0.1, 0.5, 1.0, 2.0};
  std::vector<double> pi_fraction_grid{0.0, 0.25, 0.5};
  std::vector<double> eps_grid{0.1, 0.5, 1.0, 5.0};
  SolveBudget budget{};
  double cond_limit = 1e12;
};

struct AttemptRecord {
  double alpha = 0.0;
  double pi_fraction = 0.0;
  double eps = 0.0;
  SolveStatus status = SolveStatus::BudgetExhausted;
  long iterations = 0;
  double residual = 0.0;
};

struct SynthesisResult {
  bool feasible = false;
  double gamma = 0.0;
  double alpha = 0.0;
  double pi_fraction = 0.0;
  double eps = 0.0;
  std::vector<NodeCertificates> certificates;
  std::vector<SynthesisSlacks> slacks;
  std::vector<NodeGains> gains;
  Eigen::MatrixXd initial_weight;
  VerifyReport verification;
  std::vector<AttemptRecord> attempts;
  Eigen::VectorXd raw_x;
};

/// Scans the scalar grid in lexicographic order and returns the first
/// parameter combination whose joint LMI is feasible. A previous feasible
/// result can seed the search with its scalars and iterate.
SynthesisResult synthesize(const NetworkModel& model,
                           const DirectedGraph& graph,
                           const SamplingSchedule& schedule, double gamma,
                           const SynthesisOptions& options = {},
                           const SynthesisResult* warm_start = nullptr);

struct BisectionOptions {
  double gamma_init = 1.0;
  /// Terminates when gamma_hi - gamma_lo <= tol (absolute).
  double tol = 0.05;
  double gamma_cap = 1e6;
  /// Upward factors re-solved after the bisection to spot-check that
  /// feasibility does not degrade as the bound loosens.
  std::vector<double> monotonicity_factors{1.5, 4.0};
};

struct ProbeRecord {
  double gamma = 0.0;
  bool feasible = false;
};

struct GammaSearchResult {
  bool feasible = false;
  double gamma_min = 0.0;
  SynthesisResult best;
  std::vector<ProbeRecord> probes;
  std::vector<ProbeRecord> monotonicity;
  bool monotone_on_probes = true;
};

/// Doubles gamma until feasible, then bisects down, warm-starting each
/// probe from the smallest feasible witness so far. The returned result
/// always holds a re-verified witness at gamma_min.
GammaSearchResult minimize_gamma(const NetworkModel& model,
                                 const DirectedGraph& graph,
                                 const SamplingSchedule& schedule,
                                 const SynthesisOptions& options = {},
                                 const BisectionOptions& bisect = {});

struct AnalysisResult {
  bool feasible = false;
  double gamma = 0.0;
  double alpha = 0.0;
  double pi_fraction = 0.0;
  std::vector<NodeCertificates> certificates;
  std::vector<AnalysisSlacks> slacks;
  Eigen::MatrixXd initial_weight;
  VerifyReport verification;
  std::vector<AttemptRecord> attempts;
};

/// Certifies fixed gains at a given gamma by searching certificates over
/// the (alpha, pi) grid.
AnalysisResult analyze_gains(const NetworkModel& model,
                             const DirectedGraph& graph,
                             const SamplingSchedule& schedule,
                             const std::vector<NodeGains>& gains, double gamma,
                             const SynthesisOptions& options = {});

/// Stand-alone eigenvalue verification of a complete witness: certificate
/// positivity, the Park coupling block, and the closed-loop analysis form
/// with the multipliers tied through eps and eps_bar. Used both as the
/// post-solve gate and to re-check witnesses loaded from disk.
VerifyReport recheck_witness(const NetworkModel& model,
                             const DirectedGraph& graph,
                             const std::vector<NodeCertificates>& certs,
                             const std::vector<SynthesisSlacks>& slacks,
                             const std::vector<NodeGains>& gains,
                             double gamma);

} // namespace rrhoc
