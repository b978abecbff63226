#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rrhoc/block_matrix.hpp"
#include "rrhoc/graph.hpp"
#include "rrhoc/plant.hpp"
#include "rrhoc/schedule.hpp"

namespace rrhoc {

/// Lyapunov-Krasovskii data certifying one node. Yhat, S, R, W are n x n
/// symmetric; G is the free cross term of the reciprocal bound; alpha the
/// decay rate, pi the cross-node multiplier, tau the delay bound.
struct NodeCertificates {
  Eigen::MatrixXd Yhat;
  Eigen::MatrixXd S;
  Eigen::MatrixXd R;
  Eigen::MatrixXd W;
  Eigen::MatrixXd G;
  double alpha = 0.0;
  double pi = 0.0;
  double tau = 0.0;
};

/// Free multipliers of the analysis form (gains fixed).
struct AnalysisSlacks {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Z;
  Eigen::MatrixXd Q;
};

/// Synthesis variables: Z and Q are tied to X through the scalars, the
/// gain products F = X' K and U = X' L replace the gains themselves.
struct SynthesisSlacks {
  Eigen::MatrixXd X;
  Eigen::MatrixXd F;
  Eigen::MatrixXd U;
  double eps = 0.0;
  double eps_bar = 0.0;
};

/// Recovered observer data: coupling gain K (n x l), output injection
/// gain L (n x r).
struct NodeGains {
  Eigen::MatrixXd K;
  Eigen::MatrixXd L;
};

/// Assembled quadratic form with its block layout, ready for the solver
/// or for export.
struct AssembledForm {
  Eigen::MatrixXd matrix;
  std::vector<std::string> labels;
  std::vector<int> sizes;
};

/// Result of the reciprocal (Park) bound on one node: the Jensen side and
/// the matrix side. Lemma guarantees lhs >= rhs whenever park_block is
/// positive semidefinite.
struct ReciprocalBound {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Couples Phi11 = diag(pi_j Yhat_j + (pi^2/4) W_j), Phi22 =
/// diag((pi^2/4) W_j), Phi12 = -Phi22, over j in V_i ascending.
struct CouplingPenalty {
  Eigen::MatrixXd phi11;
  Eigen::MatrixXd phi12;
  Eigen::MatrixXd phi22;
  std::vector<int> order;
};

/// [[R, G], [G', R]], the feasibility certificate of the reciprocal bound.
Eigen::MatrixXd park_block(const Eigen::MatrixXd& R, const Eigen::MatrixXd& G);

/// (p+1) x (p+1) block matrix with R on the diagonal and (G + G')/2 off it.
Eigen::MatrixXd interval_weight_matrix(const Eigen::MatrixXd& R,
                                       const Eigen::MatrixXd& G, int p);

/// Successive-difference operator mapping the stacked chain
/// [e(t); s_1; ...; s_p; e(t - tau)] to its p+1 consecutive differences.
/// Shape (p+1)n x (p+2)n.
Eigen::MatrixXd difference_operator(int p, int n);

/// Evaluates both sides of the reciprocal bound for concrete gap lengths
/// and difference vectors: lhs = (sum gaps) * sum_k deltas_k' R deltas_k /
/// gap_k, rhs = stacked' interval_weight_matrix stacked.
ReciprocalBound reciprocal_bound_check(const Eigen::MatrixXd& R,
                                       const Eigen::MatrixXd& G,
                                       const std::vector<double>& gaps,
                                       const std::vector<Eigen::VectorXd>& deltas);

/// exp(-2 alpha tau) T' Psi T, shifted on the corners by the Lyapunov
/// derivative terms: top-left minus 2 alpha Yhat + S, bottom-right plus
/// exp(-2 alpha tau) S. Partition [n, p n, n].
Eigen::MatrixXd damped_difference_penalty(const NodeCertificates& certs,
                                          int p);

/// Neighbour-side penalty of node `node`; needs certificates of every
/// node because it reads the neighbours' data.
CouplingPenalty coupling_penalty(const DirectedGraph& graph, int node,
                                 const std::vector<NodeCertificates>& certs);

/// Sets tau_i = node_max_delay(p_i) on every node with p_i >= 1.
void fill_delays(std::vector<NodeCertificates>& certs,
                 const DirectedGraph& graph, const SamplingSchedule& schedule);

/// Range checks from the stability theorems: alpha_i > 0, tau_i > 0,
/// 0 <= pi_i < 2 alpha_i / q_i (pi_i = 0 when q_i = 0). Throws with the
/// node id on violation.
void validate_scalars(const std::vector<NodeCertificates>& certs,
                      const DirectedGraph& graph);

/// Analysis form: the closed-loop matrix that must be negative definite
/// for node `node` given fixed gains. Blocks are ordered
/// [deriv, state, own_samples, delayed, neighbor_states, neighbor_samples,
/// disturbance] with sizes [n, n, pn, n, pn, pn, m_w + m_v].
AssembledForm assemble_analysis_form(const NetworkModel& model,
                                     const DirectedGraph& graph, int node,
                                     const std::vector<NodeCertificates>& certs,
                                     const NodeGains& gains,
                                     const AnalysisSlacks& slacks,
                                     double gamma);

/// Synthesis form: same layout, gains folded into F and U, multipliers
/// tied by eps and eps_bar. Coincides with the analysis form under
/// Z = eps X, Q = eps_bar X, F = X' K, U = X' L.
AssembledForm assemble_synthesis_form(const NetworkModel& model,
                                      const DirectedGraph& graph, int node,
                                      const std::vector<NodeCertificates>& certs,
                                      const SynthesisSlacks& slacks,
                                      double gamma);

/// Solves X' K = F and X' L = U. Throws if X is singular to working
/// precision (condition estimate above cond_limit).
NodeGains recover_gains(const SynthesisSlacks& slacks,
                        double cond_limit = 1e12);

/// Initial-condition weight of the performance ratio:
/// P = (1/N) sum_i (Yhat_i + S_i (1 - exp(-2 alpha_i tau_i)) / (2 alpha_i)).
Eigen::MatrixXd initial_state_weight(const std::vector<NodeCertificates>& certs);

} // namespace rrhoc
