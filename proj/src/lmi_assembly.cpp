#include "rrhoc/lmi_assembly.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rrhoc {

namespace {

// pi^2 / 4, the constant of the sampled-difference bound.
constexpr double kQuarterPiSq = 2.4674011002723396547086227499689;

Eigen::MatrixXd repeat_cols(const Eigen::MatrixXd& m, int p) {
  Eigen::MatrixXd out(m.rows(), m.cols() * p);
  for (int k = 0; k < p; ++k) {
    out.middleCols(k * m.cols(), m.cols()) = m;
  }
  return out;
}

Eigen::MatrixXd repeat_rows(const Eigen::MatrixXd& m, int p) {
  Eigen::MatrixXd out(m.rows() * p, m.cols());
  for (int k = 0; k < p; ++k) {
    out.middleRows(k * m.rows(), m.rows()) = m;
  }
  return out;
}

Eigen::MatrixXd tile(const Eigen::MatrixXd& m, int p, int q) {
  Eigen::MatrixXd out(m.rows() * p, m.cols() * q);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) {
      out.block(i * m.rows(), j * m.cols(), m.rows(), m.cols()) = m;
    }
  }
  return out;
}

void require_square(const Eigen::MatrixXd& m, int n, const std::string& what) {
  if (m.rows() != n || m.cols() != n) {
    throw std::invalid_argument(what + " must be " + std::to_string(n) + "x" +
                                std::to_string(n) + ", got " +
                                std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()));
  }
}

void check_certificates(const NodeCertificates& c, int n,
                        const std::string& tag) {
  require_square(c.Yhat, n, tag + " Yhat");
  require_square(c.S, n, tag + " S");
  require_square(c.R, n, tag + " R");
  require_square(c.W, n, tag + " W");
  require_square(c.G, n, tag + " G");
}

struct NodeContext {
  int n = 0;
  int p = 0;
  int q = 0;
  int m = 0;
  double tau = 0.0;
  double sum_tau_sq = 0.0; // sum of tau_j^2 over j with i in V_j
};

NodeContext node_context(const NetworkModel& model, const DirectedGraph& graph,
                         int node, const std::vector<NodeCertificates>& certs) {
  if (graph.node_count() != model.node_count()) {
    throw std::invalid_argument("graph and model disagree on the node count");
  }
  if (static_cast<int>(certs.size()) != model.node_count()) {
    throw std::invalid_argument("need one certificate set per node");
  }
  NodeContext ctx;
  ctx.n = model.n();
  ctx.p = graph.in_degree(node);
  ctx.q = graph.out_degree(node);
  ctx.m = model.m_w() + model.m_v(node);
  if (ctx.p < 1) {
    throw std::invalid_argument(
        "node " + std::to_string(node) +
        " has no neighbours; the sampled coupling analysis needs in-degree "
        ">= 1");
  }
  for (int i = 1; i <= model.node_count(); ++i) {
    check_certificates(certs[static_cast<size_t>(i - 1)], ctx.n,
                       "node " + std::to_string(i));
  }
  ctx.tau = certs[static_cast<size_t>(node - 1)].tau;
  if (!(ctx.tau > 0.0)) {
    throw std::invalid_argument("node " + std::to_string(node) +
                                " has no positive delay bound set");
  }
  for (int j : graph.out_neighbors(node)) {
    const double tj = certs[static_cast<size_t>(j - 1)].tau;
    if (!(tj > 0.0)) {
      throw std::invalid_argument("node " + std::to_string(j) +
                                  " has no positive delay bound set");
    }
    ctx.sum_tau_sq += tj * tj;
  }
  return ctx;
}

std::vector<std::string> form_labels() {
  return {"deriv",           "state",            "own_samples", "delayed",
          "neighbor_states", "neighbor_samples", "disturbance"};
}

} // namespace

Eigen::MatrixXd park_block(const Eigen::MatrixXd& R, const Eigen::MatrixXd& G) {
  const int n = static_cast<int>(R.rows());
  require_square(R, n, "R");
  require_square(G, n, "G");
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = R;
  out.topRightCorner(n, n) = G;
  out.bottomLeftCorner(n, n) = G.transpose();
  out.bottomRightCorner(n, n) = R;
  return out;
}

Eigen::MatrixXd interval_weight_matrix(const Eigen::MatrixXd& R,
                                       const Eigen::MatrixXd& G, int p) {
  if (p < 1) {
    throw std::invalid_argument("interval weight needs p >= 1");
  }
  const int n = static_cast<int>(R.rows());
  require_square(R, n, "R");
  require_square(G, n, "G");
  const Eigen::MatrixXd cross = 0.5 * (G + G.transpose());
  Eigen::MatrixXd out((p + 1) * n, (p + 1) * n);
  for (int i = 0; i <= p; ++i) {
    for (int j = 0; j <= p; ++j) {
      out.block(i * n, j * n, n, n) = (i == j) ? R : cross;
    }
  }
  return out;
}

Eigen::MatrixXd difference_operator(int p, int n) {
  if (p < 1 || n < 1) {
    throw std::invalid_argument("difference operator needs p >= 1, n >= 1");
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero((p + 1) * n, (p + 2) * n);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k <= p; ++k) {
    t.block(k * n, k * n, n, n) = eye;
    t.block(k * n, (k + 1) * n, n, n) = -eye;
  }
  return t;
}

ReciprocalBound reciprocal_bound_check(
    const Eigen::MatrixXd& R, const Eigen::MatrixXd& G,
    const std::vector<double>& gaps, const std::vector<Eigen::VectorXd>& deltas) {
  if (gaps.size() != deltas.size() || gaps.size() < 2) {
    throw std::invalid_argument("need matching gaps and deltas, at least two");
  }
  const int n = static_cast<int>(R.rows());
  double total = 0.0;
  for (double g : gaps) {
    if (!(g > 0.0)) {
      throw std::invalid_argument("gap lengths must be positive");
    }
    total += g;
  }
  ReciprocalBound out;
  Eigen::VectorXd stacked(static_cast<Eigen::Index>(gaps.size()) * n);
  for (size_t k = 0; k < gaps.size(); ++k) {
    if (deltas[k].size() != n) {
      throw std::invalid_argument("delta dimension mismatch");
    }
    out.lhs += total / gaps[k] * deltas[k].dot(R * deltas[k]);
    stacked.segment(static_cast<Eigen::Index>(k) * n, n) = deltas[k];
  }
  const Eigen::MatrixXd psi =
      interval_weight_matrix(R, G, static_cast<int>(gaps.size()) - 1);
  out.rhs = stacked.dot(psi * stacked);
  return out;
}

Eigen::MatrixXd damped_difference_penalty(const NodeCertificates& certs,
                                          int p) {
  const int n = static_cast<int>(certs.R.rows());
  check_certificates(certs, n, "node");
  if (!(certs.tau > 0.0) || !(certs.alpha > 0.0)) {
    throw std::invalid_argument(
        "penalty needs positive alpha and delay bound");
  }
  const Eigen::MatrixXd t = difference_operator(p, n);
  const Eigen::MatrixXd psi = interval_weight_matrix(certs.R, certs.G, p);
  const double damp = std::exp(-2.0 * certs.alpha * certs.tau);
  Eigen::MatrixXd out = damp * t.transpose() * psi * t;
  out.topLeftCorner(n, n) -= 2.0 * certs.alpha * certs.Yhat + certs.S;
  out.bottomRightCorner(n, n) += damp * certs.S;
  return out;
}

CouplingPenalty coupling_penalty(const DirectedGraph& graph, int node,
                                 const std::vector<NodeCertificates>& certs) {
  if (static_cast<int>(certs.size()) != graph.node_count()) {
    throw std::invalid_argument("need one certificate set per node");
  }
  const auto& neigh = graph.neighborhood(node);
  if (neigh.empty()) {
    throw std::invalid_argument("node " + std::to_string(node) +
                                " has no neighbours");
  }
  const int n = static_cast<int>(certs.front().Yhat.rows());
  const int p = static_cast<int>(neigh.size());
  CouplingPenalty out;
  out.order = neigh;
  out.phi11 = Eigen::MatrixXd::Zero(p * n, p * n);
  out.phi22 = Eigen::MatrixXd::Zero(p * n, p * n);
  for (int k = 0; k < p; ++k) {
    const auto& cj = certs[static_cast<size_t>(neigh[static_cast<size_t>(k)] - 1)];
    check_certificates(cj, n, "node " + std::to_string(neigh[static_cast<size_t>(k)]));
    out.phi11.block(k * n, k * n, n, n) =
        cj.pi * cj.Yhat + kQuarterPiSq * cj.W;
    out.phi22.block(k * n, k * n, n, n) = kQuarterPiSq * cj.W;
  }
  out.phi12 = -out.phi22;
  return out;
}

void fill_delays(std::vector<NodeCertificates>& certs,
                 const DirectedGraph& graph, const SamplingSchedule& schedule) {
  if (static_cast<int>(certs.size()) != graph.node_count()) {
    throw std::invalid_argument("need one certificate set per node");
  }
  for (int i = 1; i <= graph.node_count(); ++i) {
    const int p = graph.in_degree(i);
    if (p >= 1) {
      certs[static_cast<size_t>(i - 1)].tau = schedule.node_max_delay(p);
    }
  }
}

void validate_scalars(const std::vector<NodeCertificates>& certs,
                      const DirectedGraph& graph) {
  if (static_cast<int>(certs.size()) != graph.node_count()) {
    throw std::invalid_argument("need one certificate set per node");
  }
  for (int i = 1; i <= graph.node_count(); ++i) {
    const auto& c = certs[static_cast<size_t>(i - 1)];
    const std::string tag = "node " + std::to_string(i) + ": ";
    if (!(c.alpha > 0.0)) {
      throw std::invalid_argument(tag + "alpha must be positive");
    }
    if (graph.in_degree(i) >= 1 && !(c.tau > 0.0)) {
      throw std::invalid_argument(tag + "delay bound must be positive");
    }
    const int q = graph.out_degree(i);
    if (q == 0) {
      if (c.pi != 0.0) {
        throw std::invalid_argument(tag +
                                    "pi must be zero on nodes nobody polls");
      }
    } else {
      if (c.pi < 0.0 ||
          c.pi >= 2.0 * c.alpha / static_cast<double>(q)) {
        throw std::invalid_argument(
            tag + "pi must lie in [0, 2 alpha / q) = [0, " +
            std::to_string(2.0 * c.alpha / static_cast<double>(q)) + ")");
      }
    }
  }
}

AssembledForm assemble_analysis_form(const NetworkModel& model,
                                     const DirectedGraph& graph, int node,
                                     const std::vector<NodeCertificates>& certs,
                                     const NodeGains& gains,
                                     const AnalysisSlacks& slacks,
                                     double gamma) {
  const NodeContext ctx = node_context(model, graph, node, certs);
  const int n = ctx.n;
  const int p = ctx.p;
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("gamma must be positive");
  }
  require_square(slacks.X, n, "X");
  require_square(slacks.Z, n, "Z");
  require_square(slacks.Q, n, "Q");

  const auto& nd = model.node(node);
  if (gains.L.rows() != n || gains.L.cols() != nd.r()) {
    throw std::invalid_argument("L must be n x r");
  }
  if (gains.K.rows() != n || gains.K.cols() != nd.l()) {
    throw std::invalid_argument("K must be n x l");
  }

  const auto& own = certs[static_cast<size_t>(node - 1)];
  const Eigen::MatrixXd a_cl = model.plant().A - gains.L * nd.C;
  const Eigen::MatrixXd b_cl =
      model.input_matrix(node) - gains.L * model.feed_matrix(node);
  const Eigen::MatrixXd kh = gains.K * nd.H;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const double g2 = gamma * gamma;

  const Eigen::MatrixXd pen = damped_difference_penalty(own, p);
  const auto pen11 = pen.topLeftCorner(n, n);
  const auto pen12 = pen.block(0, n, n, p * n);
  const auto pen13 = pen.topRightCorner(n, n);
  const auto pen22 = pen.block(n, n, p * n, p * n);
  const auto pen23 = pen.block(n, n + p * n, p * n, n);
  const auto pen33 = pen.bottomRightCorner(n, n);
  const CouplingPenalty phi = coupling_penalty(graph, node, certs);

  BlockPartition part({n, n, p * n, n, p * n, p * n, ctx.m});
  BlockMatrix xi = BlockMatrix::square(part);
  enum { A0 = 0, B1, C2, D3, E4, F5, G6 };

  xi.set(A0, A0, ctx.tau * ctx.tau * own.R + ctx.sum_tau_sq * own.W -
                     slacks.Z - slacks.Z.transpose());
  xi.set_sym_pair(A0, B1,
                  own.Yhat - slacks.X + slacks.Z.transpose() * a_cl);
  xi.set_sym_pair(A0, C2, repeat_cols(-slacks.Z.transpose() * kh, p));
  xi.set_sym_pair(A0, F5,
                  repeat_cols(-slacks.Q + slacks.Z.transpose() * kh, p));
  xi.set_sym_pair(A0, G6, slacks.Z.transpose() * b_cl);

  xi.set(B1, B1, static_cast<double>(ctx.p + ctx.q) / g2 * eye - pen11 +
                     slacks.X.transpose() * a_cl +
                     a_cl.transpose() * slacks.X);
  xi.set_sym_pair(B1, C2,
                  -pen12 - repeat_cols(slacks.X.transpose() * kh, p));
  xi.set_sym_pair(B1, D3, -pen13);
  xi.set_sym_pair(B1, E4, repeat_cols(-(1.0 / g2) * eye, p));
  xi.set_sym_pair(B1, F5,
                  repeat_cols(slacks.X.transpose() * kh +
                                  a_cl.transpose() * slacks.Q,
                              p));
  xi.set_sym_pair(B1, G6, slacks.X.transpose() * b_cl);

  xi.set(C2, C2, -pen22);
  xi.set_sym_pair(C2, D3, -pen23);
  const Eigen::MatrixXd qkh = slacks.Q.transpose() * kh;
  xi.set_sym_pair(C2, F5, tile(-qkh.transpose(), p, p));

  xi.set(D3, D3, -pen33);
  xi.set(E4, E4, -phi.phi11);
  xi.set_sym_pair(E4, F5, -phi.phi12);
  xi.set(F5, F5, tile(qkh + qkh.transpose(), p, p) - phi.phi22);
  xi.set_sym_pair(F5, G6, repeat_rows(slacks.Q.transpose() * b_cl, p));
  xi.set(G6, G6, -Eigen::MatrixXd::Identity(ctx.m, ctx.m));

  AssembledForm out;
  out.matrix = xi.dense();
  out.labels = form_labels();
  out.sizes = part.sizes();
  return out;
}

AssembledForm assemble_synthesis_form(const NetworkModel& model,
                                      const DirectedGraph& graph, int node,
                                      const std::vector<NodeCertificates>& certs,
                                      const SynthesisSlacks& slacks,
                                      double gamma) {
  const NodeContext ctx = node_context(model, graph, node, certs);
  const int n = ctx.n;
  const int p = ctx.p;
  if (!(gamma > 0.0)) {
    throw std::invalid_argument("gamma must be positive");
  }
  if (!(slacks.eps > 0.0) || !(slacks.eps_bar > 0.0)) {
    throw std::invalid_argument("eps and eps_bar must be positive");
  }
  require_square(slacks.X, n, "X");

  const auto& nd = model.node(node);
  if (slacks.U.rows() != n || slacks.U.cols() != nd.r()) {
    throw std::invalid_argument("U must be n x r");
  }
  if (slacks.F.rows() != n || slacks.F.cols() != nd.l()) {
    throw std::invalid_argument("F must be n x l");
  }

  const auto& own = certs[static_cast<size_t>(node - 1)];
  const double eps = slacks.eps;
  const double epb = slacks.eps_bar;
  const Eigen::MatrixXd xa_uc =
      slacks.X.transpose() * model.plant().A - slacks.U * nd.C;
  const Eigen::MatrixXd fh = slacks.F * nd.H;
  const Eigen::MatrixXd xb_ud =
      slacks.X.transpose() * model.input_matrix(node) -
      slacks.U * model.feed_matrix(node);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const double g2 = gamma * gamma;

  const Eigen::MatrixXd pen = damped_difference_penalty(own, p);
  const auto pen11 = pen.topLeftCorner(n, n);
  const auto pen12 = pen.block(0, n, n, p * n);
  const auto pen13 = pen.topRightCorner(n, n);
  const auto pen22 = pen.block(n, n, p * n, p * n);
  const auto pen23 = pen.block(n, n + p * n, p * n, n);
  const auto pen33 = pen.bottomRightCorner(n, n);
  const CouplingPenalty phi = coupling_penalty(graph, node, certs);

  BlockPartition part({n, n, p * n, n, p * n, p * n, ctx.m});
  BlockMatrix xi = BlockMatrix::square(part);
  enum { A0 = 0, B1, C2, D3, E4, F5, G6 };

  xi.set(A0, A0, ctx.tau * ctx.tau * own.R + ctx.sum_tau_sq * own.W -
                     eps * (slacks.X + slacks.X.transpose()));
  xi.set_sym_pair(A0, B1, own.Yhat - slacks.X + eps * xa_uc);
  xi.set_sym_pair(A0, C2, repeat_cols(-eps * fh, p));
  xi.set_sym_pair(A0, F5, repeat_cols(-epb * slacks.X + eps * fh, p));
  xi.set_sym_pair(A0, G6, eps * xb_ud);

  xi.set(B1, B1, static_cast<double>(ctx.p + ctx.q) / g2 * eye - pen11 +
                     xa_uc + xa_uc.transpose());
  xi.set_sym_pair(B1, C2, -pen12 - repeat_cols(fh, p));
  xi.set_sym_pair(B1, D3, -pen13);
  xi.set_sym_pair(B1, E4, repeat_cols(-(1.0 / g2) * eye, p));
  xi.set_sym_pair(B1, F5, repeat_cols(fh + epb * xa_uc.transpose(), p));
  xi.set_sym_pair(B1, G6, xb_ud);

  xi.set(C2, C2, -pen22);
  xi.set_sym_pair(C2, D3, -pen23);
  xi.set_sym_pair(C2, F5, tile(-epb * fh.transpose(), p, p));

  xi.set(D3, D3, -pen33);
  xi.set(E4, E4, -phi.phi11);
  xi.set_sym_pair(E4, F5, -phi.phi12);
  xi.set(F5, F5, epb * tile(fh + fh.transpose(), p, p) - phi.phi22);
  xi.set_sym_pair(F5, G6, epb * repeat_rows(xb_ud, p));
  xi.set(G6, G6, -Eigen::MatrixXd::Identity(ctx.m, ctx.m));

  AssembledForm out;
  out.matrix = xi.dense();
  out.labels = form_labels();
  out.sizes = part.sizes();
  return out;
}

NodeGains recover_gains(const SynthesisSlacks& slacks, double cond_limit) {
  const Eigen::MatrixXd xt = slacks.X.transpose();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      xt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 0.0 ||
      sv(0) / sv(sv.size() - 1) > cond_limit) {
    throw std::runtime_error(
        "slack matrix X is too ill-conditioned to recover gains");
  }
  NodeGains out;
  out.K = svd.solve(slacks.F);
  out.L = svd.solve(slacks.U);
  return out;
}

Eigen::MatrixXd initial_state_weight(
    const std::vector<NodeCertificates>& certs) {
  if (certs.empty()) {
    throw std::invalid_argument("need at least one certificate set");
  }
  const int n = static_cast<int>(certs.front().Yhat.rows());
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
  for (size_t i = 0; i < certs.size(); ++i) {
    const auto& c = certs[i];
    check_certificates(c, n, "node " + std::to_string(i + 1));
    if (!(c.alpha > 0.0) || !(c.tau > 0.0)) {
      throw std::invalid_argument(
          "initial-state weight needs positive alpha and tau on node " +
          std::to_string(i + 1));
    }
    acc += c.Yhat +
           c.S * ((1.0 - std::exp(-2.0 * c.alpha * c.tau)) / (2.0 * c.alpha));
  }
  return acc / static_cast<double>(certs.size());
}

} // namespace rrhoc
