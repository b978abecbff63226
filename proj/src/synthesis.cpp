#include "rrhoc/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace rrhoc {

namespace {

std::string node_tag(int i) { return "node" + std::to_string(i); }

void add_certificate_variables(VariableLayout& layout, int n, int i, int* yhat,
                               int* s, int* r, int* w, int* g) {
  *yhat = layout.add_symmetric(node_tag(i) + "_Yhat", n);
  *s = layout.add_symmetric(node_tag(i) + "_S", n);
  *r = layout.add_symmetric(node_tag(i) + "_R", n);
  *w = layout.add_symmetric(node_tag(i) + "_W", n);
  *g = layout.add_matrix(node_tag(i) + "_G", n, n);
}

template <typename Handles>
std::vector<NodeCertificates> unpack_certificates(
    const VariableLayout& layout, const std::vector<Handles>& handles,
    const std::vector<NodeCertificates>& scalars, const Eigen::VectorXd& x) {
  std::vector<NodeCertificates> certs = scalars;
  for (size_t i = 0; i < handles.size(); ++i) {
    certs[i].Yhat = layout.matrix(handles[i].yhat, x);
    certs[i].S = layout.matrix(handles[i].s, x);
    certs[i].R = layout.matrix(handles[i].r, x);
    certs[i].W = layout.matrix(handles[i].w, x);
    certs[i].G = layout.matrix(handles[i].g, x);
  }
  return certs;
}

template <typename Handles>
void add_positivity_constraints(LmiProblem& problem,
                                const std::vector<Handles>& handles, int i) {
  const VariableLayout layout = problem.layout;
  const auto& h = handles[static_cast<size_t>(i - 1)];
  const std::pair<const char*, int> wanted[] = {
      {"_Yhat_pd", h.yhat}, {"_S_pd", h.s}, {"_R_pd", h.r}, {"_W_pd", h.w}};
  for (const auto& [suffix, handle] : wanted) {
    problem.constraints.push_back(
        {node_tag(i) + suffix, ConstraintKind::NegativeDefinite,
         [layout, handle](const Eigen::VectorXd& x) {
           return Eigen::MatrixXd(-layout.matrix(handle, x));
         }});
  }
  const int hr = h.r;
  const int hg = h.g;
  problem.constraints.push_back(
      {node_tag(i) + "_park", ConstraintKind::PositiveSemidefinite,
       [layout, hr, hg](const Eigen::VectorXd& x) {
         return park_block(layout.matrix(hr, x), layout.matrix(hg, x));
       }});
}

void check_grid(const SynthesisOptions& options, bool need_eps) {
  if (options.alpha_grid.empty() || options.pi_fraction_grid.empty() ||
      (need_eps && options.eps_grid.empty())) {
    throw std::invalid_argument("scalar grids must be nonempty");
  }
  for (double a : options.alpha_grid) {
    if (!(a > 0.0)) {
      throw std::invalid_argument("alpha grid values must be positive");
    }
  }
  for (double c : options.pi_fraction_grid) {
    if (c < 0.0 || c >= 1.0) {
      throw std::invalid_argument("pi fractions must lie in [0, 1)");
    }
  }
  if (need_eps) {
    for (double e : options.eps_grid) {
      if (!(e > 0.0)) {
        throw std::invalid_argument("eps grid values must be positive");
      }
    }
  }
}

std::vector<NodeCertificates> scalar_template(const DirectedGraph& graph,
                                              const SamplingSchedule& schedule,
                                              double alpha,
                                              double pi_fraction) {
  std::vector<NodeCertificates> scalars(
      static_cast<size_t>(graph.node_count()));
  fill_delays(scalars, graph, schedule);
  for (int i = 1; i <= graph.node_count(); ++i) {
    auto& c = scalars[static_cast<size_t>(i - 1)];
    c.alpha = alpha;
    const int q = graph.out_degree(i);
    c.pi = (q > 0) ? pi_fraction * 2.0 * alpha / static_cast<double>(q) : 0.0;
  }
  return scalars;
}

} // namespace

SynthesisProblem build_synthesis_problem(const NetworkModel& model,
                                         const DirectedGraph& graph,
                                         std::vector<NodeCertificates> scalars,
                                         std::vector<double> eps,
                                         std::vector<double> eps_bar,
                                         double gamma) {
  const int nn = model.node_count();
  if (graph.node_count() != nn) {
    throw std::invalid_argument("graph and model disagree on the node count");
  }
  if (static_cast<int>(scalars.size()) != nn ||
      static_cast<int>(eps.size()) != nn ||
      static_cast<int>(eps_bar.size()) != nn) {
    throw std::invalid_argument("need scalars, eps and eps_bar per node");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("gamma must be positive");
  }
  for (int i = 1; i <= nn; ++i) {
    if (graph.in_degree(i) < 1) {
      throw std::invalid_argument("node " + std::to_string(i) +
                                  " has no neighbours; synthesis needs "
                                  "in-degree >= 1 everywhere");
    }
  }
  const int n = model.n();
  // Give the scalar template placeholder matrices so validate_scalars and
  // shape checks can run before any variables exist.
  for (auto& c : scalars) {
    c.Yhat = c.S = c.R = c.W = c.G = Eigen::MatrixXd::Zero(n, n);
  }
  validate_scalars(scalars, graph);

  SynthesisProblem sp;
  sp.scalars = std::move(scalars);
  sp.eps = std::move(eps);
  sp.eps_bar = std::move(eps_bar);
  sp.gamma = gamma;
  sp.handles.resize(static_cast<size_t>(nn));

  for (int i = 1; i <= nn; ++i) {
    auto& h = sp.handles[static_cast<size_t>(i - 1)];
    add_certificate_variables(sp.problem.layout, n, i, &h.yhat, &h.s, &h.r,
                              &h.w, &h.g);
    h.x = sp.problem.layout.add_matrix(node_tag(i) + "_X", n, n);
    h.f = sp.problem.layout.add_matrix(node_tag(i) + "_F", n,
                                       model.node(i).l());
    h.u = sp.problem.layout.add_matrix(node_tag(i) + "_U", n,
                                       model.node(i).r());
  }

  for (int i = 1; i <= nn; ++i) {
    add_positivity_constraints(sp.problem, sp.handles, i);

    const VariableLayout layout = sp.problem.layout;
    const auto handles = sp.handles;
    const auto scalar_certs = sp.scalars;
    const double node_eps = sp.eps[static_cast<size_t>(i - 1)];
    const double node_eps_bar = sp.eps_bar[static_cast<size_t>(i - 1)];
    const double g = sp.gamma;
    sp.problem.constraints.push_back(
        {node_tag(i) + "_closed_loop", ConstraintKind::NegativeDefinite,
         [model, graph, layout, handles, scalar_certs, node_eps, node_eps_bar,
          g, i](const Eigen::VectorXd& x) {
           const auto certs =
               unpack_certificates(layout, handles, scalar_certs, x);
           SynthesisSlacks slacks;
           const auto& h = handles[static_cast<size_t>(i - 1)];
           slacks.X = layout.matrix(h.x, x);
           slacks.F = layout.matrix(h.f, x);
           slacks.U = layout.matrix(h.u, x);
           slacks.eps = node_eps;
           slacks.eps_bar = node_eps_bar;
           return assemble_synthesis_form(model, graph, i, certs, slacks, g)
               .matrix;
         }});
  }
  return sp;
}

std::vector<NodeCertificates> extract_certificates(const SynthesisProblem& sp,
                                                   const Eigen::VectorXd& x) {
  return unpack_certificates(sp.problem.layout, sp.handles, sp.scalars, x);
}

std::vector<SynthesisSlacks> extract_synthesis_slacks(
    const SynthesisProblem& sp, const Eigen::VectorXd& x) {
  std::vector<SynthesisSlacks> out(sp.handles.size());
  for (size_t i = 0; i < sp.handles.size(); ++i) {
    out[i].X = sp.problem.layout.matrix(sp.handles[i].x, x);
    out[i].F = sp.problem.layout.matrix(sp.handles[i].f, x);
    out[i].U = sp.problem.layout.matrix(sp.handles[i].u, x);
    out[i].eps = sp.eps[i];
    out[i].eps_bar = sp.eps_bar[i];
  }
  return out;
}

AnalysisProblem build_analysis_problem(const NetworkModel& model,
                                       const DirectedGraph& graph,
                                       std::vector<NodeCertificates> scalars,
                                       const std::vector<NodeGains>& gains,
                                       double gamma) {
  const int nn = model.node_count();
  if (graph.node_count() != nn ||
      static_cast<int>(scalars.size()) != nn ||
      static_cast<int>(gains.size()) != nn) {
    throw std::invalid_argument("model, graph, scalars and gains must agree");
  }
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("gamma must be positive");
  }
  const int n = model.n();
  for (auto& c : scalars) {
    c.Yhat = c.S = c.R = c.W = c.G = Eigen::MatrixXd::Zero(n, n);
  }
  validate_scalars(scalars, graph);

  AnalysisProblem ap;
  ap.scalars = std::move(scalars);
  ap.gamma = gamma;
  ap.handles.resize(static_cast<size_t>(nn));

  for (int i = 1; i <= nn; ++i) {
    auto& h = ap.handles[static_cast<size_t>(i - 1)];
    add_certificate_variables(ap.problem.layout, n, i, &h.yhat, &h.s, &h.r,
                              &h.w, &h.g);
    h.x = ap.problem.layout.add_matrix(node_tag(i) + "_X", n, n);
    h.z = ap.problem.layout.add_matrix(node_tag(i) + "_Z", n, n);
    h.q = ap.problem.layout.add_matrix(node_tag(i) + "_Q", n, n);
  }

  for (int i = 1; i <= nn; ++i) {
    add_positivity_constraints(ap.problem, ap.handles, i);

    const VariableLayout layout = ap.problem.layout;
    const auto handles = ap.handles;
    const auto scalar_certs = ap.scalars;
    const NodeGains node_gains = gains[static_cast<size_t>(i - 1)];
    const double g = ap.gamma;
    ap.problem.constraints.push_back(
        {node_tag(i) + "_closed_loop", ConstraintKind::NegativeDefinite,
         [model, graph, layout, handles, scalar_certs, node_gains, g,
          i](const Eigen::VectorXd& x) {
           const auto certs =
               unpack_certificates(layout, handles, scalar_certs, x);
           AnalysisSlacks slacks;
           const auto& h = handles[static_cast<size_t>(i - 1)];
           slacks.X = layout.matrix(h.x, x);
           slacks.Z = layout.matrix(h.z, x);
           slacks.Q = layout.matrix(h.q, x);
           return assemble_analysis_form(model, graph, i, certs, node_gains,
                                         slacks, g)
               .matrix;
         }});
  }
  return ap;
}

std::vector<NodeCertificates> extract_certificates(const AnalysisProblem& ap,
                                                   const Eigen::VectorXd& x) {
  return unpack_certificates(ap.problem.layout, ap.handles, ap.scalars, x);
}

std::vector<AnalysisSlacks> extract_analysis_slacks(const AnalysisProblem& ap,
                                                    const Eigen::VectorXd& x) {
  std::vector<AnalysisSlacks> out(ap.handles.size());
  for (size_t i = 0; i < ap.handles.size(); ++i) {
    out[i].X = ap.problem.layout.matrix(ap.handles[i].x, x);
    out[i].Z = ap.problem.layout.matrix(ap.handles[i].z, x);
    out[i].Q = ap.problem.layout.matrix(ap.handles[i].q, x);
  }
  return out;
}

namespace {

struct Combo {
  double alpha = 0.0;
  double pi_fraction = 0.0;
  double eps = 0.0;
};

// Attempts one scalar combination. Returns true and fills `result` on a
// verified feasible solve with recoverable gains.
bool try_combo(const NetworkModel& model, const DirectedGraph& graph,
               const SamplingSchedule& schedule, double gamma,
               const Combo& combo, const SynthesisOptions& options,
               const std::optional<Eigen::VectorXd>& x0,
               SynthesisResult* result, AttemptRecord* attempt) {
  const int nn = model.node_count();
  auto scalars = scalar_template(graph, schedule, combo.alpha,
                                 combo.pi_fraction);
  SynthesisProblem sp = build_synthesis_problem(
      model, graph, std::move(scalars),
      std::vector<double>(static_cast<size_t>(nn), combo.eps),
      std::vector<double>(static_cast<size_t>(nn), combo.eps), gamma);
  const CompiledProblem compiled = compile(sp.problem);
  const SolveOutcome outcome = solve_feasibility(compiled, options.budget, x0);

  attempt->alpha = combo.alpha;
  attempt->pi_fraction = combo.pi_fraction;
  attempt->eps = combo.eps;
  attempt->status = outcome.status;
  attempt->iterations = outcome.iterations;
  attempt->residual = outcome.residual;
  if (outcome.status != SolveStatus::Feasible) {
    return false;
  }

  const VerifyReport verification = verify_solution(sp.problem, outcome.x);
  if (!verification.ok) {
    // The compiled success test and the independent rebuild disagree;
    // treat the combo as unusable rather than trusting either side.
    attempt->status = SolveStatus::BudgetExhausted;
    return false;
  }

  result->feasible = true;
  result->gamma = gamma;
  result->alpha = combo.alpha;
  result->pi_fraction = combo.pi_fraction;
  result->eps = combo.eps;
  result->certificates = extract_certificates(sp, outcome.x);
  result->slacks = extract_synthesis_slacks(sp, outcome.x);
  result->gains.clear();
  for (const auto& slack : result->slacks) {
    result->gains.push_back(recover_gains(slack, options.cond_limit));
  }
  result->initial_weight = initial_state_weight(result->certificates);
  result->verification = verification;
  // Independent gate: the analysis form with the recovered gains and the
  // tied multipliers must hold on its own.
  const VerifyReport recheck =
      recheck_witness(model, graph, result->certificates, result->slacks,
                      result->gains, gamma);
  result->verification.ok = result->verification.ok && recheck.ok;
  result->verification.checks.insert(result->verification.checks.end(),
                                     recheck.checks.begin(),
                                     recheck.checks.end());
  if (!result->verification.ok) {
    attempt->status = SolveStatus::BudgetExhausted;
    auto attempts = std::move(result->attempts);
    *result = SynthesisResult{};
    result->gamma = gamma;
    result->attempts = std::move(attempts);
    return false;
  }
  result->raw_x = outcome.x;
  return true;
}

} // namespace

SynthesisResult synthesize(const NetworkModel& model,
                           const DirectedGraph& graph,
                           const SamplingSchedule& schedule, double gamma,
                           const SynthesisOptions& options,
                           const SynthesisResult* warm_start) {
  check_grid(options, true);
  SynthesisResult result;
  result.gamma = gamma;

  std::vector<Combo> combos;
  if (warm_start && warm_start->feasible) {
    combos.push_back(
        {warm_start->alpha, warm_start->pi_fraction, warm_start->eps});
  }
  for (double a : options.alpha_grid) {
    for (double c : options.pi_fraction_grid) {
      for (double e : options.eps_grid) {
        combos.push_back({a, c, e});
      }
    }
  }

  bool first = true;
  for (const auto& combo : combos) {
    std::optional<Eigen::VectorXd> x0;
    if (first && warm_start && warm_start->feasible) {
      x0 = warm_start->raw_x;
    }
    first = false;
    AttemptRecord attempt;
    const bool ok = try_combo(model, graph, schedule, gamma, combo, options,
                              x0, &result, &attempt);
    result.attempts.push_back(attempt);
    if (ok) {
      return result;
    }
  }
  result.feasible = false;
  return result;
}

GammaSearchResult minimize_gamma(const NetworkModel& model,
                                 const DirectedGraph& graph,
                                 const SamplingSchedule& schedule,
                                 const SynthesisOptions& options,
                                 const BisectionOptions& bisect) {
  if (!(bisect.gamma_init > 0.0) || !(bisect.tol > 0.0) ||
      !(bisect.gamma_cap >= bisect.gamma_init)) {
    throw std::invalid_argument("bad bisection options");
  }
  GammaSearchResult out;

  // Find any feasible gamma by doubling.
  double hi = bisect.gamma_init;
  SynthesisResult best;
  while (true) {
    SynthesisResult res = synthesize(model, graph, schedule, hi, options,
                                     best.feasible ? &best : nullptr);
    out.probes.push_back({hi, res.feasible});
    if (res.feasible) {
      best = std::move(res);
      break;
    }
    if (hi >= bisect.gamma_cap) {
      out.feasible = false;
      return out;
    }
    hi = std::min(2.0 * hi, bisect.gamma_cap);
  }

  double lo = 0.0;
  while (hi - lo > bisect.tol) {
    const double mid = 0.5 * (lo + hi);
    SynthesisResult res =
        synthesize(model, graph, schedule, mid, options, &best);
    out.probes.push_back({mid, res.feasible});
    if (res.feasible) {
      best = std::move(res);
      hi = mid;
    } else {
      lo = mid;
    }
  }

  out.feasible = true;
  out.gamma_min = hi;
  out.best = std::move(best);

  for (double factor : bisect.monotonicity_factors) {
    const double gp = out.gamma_min * factor;
    SynthesisResult res =
        synthesize(model, graph, schedule, gp, options, &out.best);
    out.monotonicity.push_back({gp, res.feasible});
    out.monotone_on_probes = out.monotone_on_probes && res.feasible;
  }
  return out;
}

AnalysisResult analyze_gains(const NetworkModel& model,
                             const DirectedGraph& graph,
                             const SamplingSchedule& schedule,
                             const std::vector<NodeGains>& gains, double gamma,
                             const SynthesisOptions& options) {
  check_grid(options, false);
  AnalysisResult result;
  result.gamma = gamma;

  for (double a : options.alpha_grid) {
    for (double c : options.pi_fraction_grid) {
      auto scalars = scalar_template(graph, schedule, a, c);
      AnalysisProblem ap =
          build_analysis_problem(model, graph, std::move(scalars), gains,
                                 gamma);
      const CompiledProblem compiled = compile(ap.problem);
      const SolveOutcome outcome =
          solve_feasibility(compiled, options.budget, std::nullopt);

      AttemptRecord attempt;
      attempt.alpha = a;
      attempt.pi_fraction = c;
      attempt.status = outcome.status;
      attempt.iterations = outcome.iterations;
      attempt.residual = outcome.residual;

      if (outcome.status == SolveStatus::Feasible) {
        const VerifyReport verification =
            verify_solution(ap.problem, outcome.x);
        if (verification.ok) {
          result.feasible = true;
          result.alpha = a;
          result.pi_fraction = c;
          result.certificates = extract_certificates(ap, outcome.x);
          result.slacks = extract_analysis_slacks(ap, outcome.x);
          result.initial_weight = initial_state_weight(result.certificates);
          result.verification = verification;
          result.attempts.push_back(attempt);
          return result;
        }
        attempt.status = SolveStatus::BudgetExhausted;
      }
      result.attempts.push_back(attempt);
    }
  }
  result.feasible = false;
  return result;
}

namespace {

ConstraintCheck eigen_check(const std::string& name, ConstraintKind kind,
                            const Eigen::MatrixXd& m) {
  const double scale = std::max(1.0, m.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  ConstraintCheck check;
  check.name = name;
  check.kind = kind;
  if (kind == ConstraintKind::NegativeDefinite) {
    check.eigenvalue = es.eigenvalues().maxCoeff();
    check.bound = -kNegDefMarginRel * scale;
    check.ok = check.eigenvalue <= check.bound;
  } else {
    check.eigenvalue = es.eigenvalues().minCoeff();
    check.bound = -kPsdTolRel * scale;
    check.ok = check.eigenvalue >= check.bound;
  }
  return check;
}

} // namespace

VerifyReport recheck_witness(const NetworkModel& model,
                             const DirectedGraph& graph,
                             const std::vector<NodeCertificates>& certs,
                             const std::vector<SynthesisSlacks>& slacks,
                             const std::vector<NodeGains>& gains,
                             double gamma) {
  const size_t nn = static_cast<size_t>(model.node_count());
  if (certs.size() != nn || slacks.size() != nn || gains.size() != nn) {
    throw std::invalid_argument("witness arrays do not match the node count");
  }
  VerifyReport report;
  report.ok = true;
  auto push = [&report](ConstraintCheck check) {
    report.ok = report.ok && check.ok;
    report.checks.push_back(std::move(check));
  };
  for (size_t idx = 0; idx < nn; ++idx) {
    const int i = static_cast<int>(idx) + 1;
    const NodeCertificates& c = certs[idx];
    push(eigen_check(node_tag(i) + "_Yhat_pd",
                     ConstraintKind::NegativeDefinite, -c.Yhat));
    push(eigen_check(node_tag(i) + "_S_pd", ConstraintKind::NegativeDefinite,
                     -c.S));
    push(eigen_check(node_tag(i) + "_R_pd", ConstraintKind::NegativeDefinite,
                     -c.R));
    push(eigen_check(node_tag(i) + "_W_pd", ConstraintKind::NegativeDefinite,
                     -c.W));
    push(eigen_check(node_tag(i) + "_park",
                     ConstraintKind::PositiveSemidefinite,
                     park_block(c.R, c.G)));
    AnalysisSlacks tied;
    tied.X = slacks[idx].X;
    tied.Z = slacks[idx].eps * slacks[idx].X;
    tied.Q = slacks[idx].eps_bar * slacks[idx].X;
    const AssembledForm form = assemble_analysis_form(
        model, graph, i, certs, gains[idx], tied, gamma);
    push(eigen_check(node_tag(i) + "_closed_loop_recheck",
                     ConstraintKind::NegativeDefinite, form.matrix));
  }
  return report;
}

} // namespace rrhoc
