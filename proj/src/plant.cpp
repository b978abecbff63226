#include "rrhoc/plant.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

namespace rrhoc {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void PlantModel::validate() const {
  if (A.rows() == 0 || A.rows() != A.cols()) {
    throw std::invalid_argument("state matrix A must be square and nonempty");
  }
  if (B2.rows() != A.rows()) {
    throw std::invalid_argument("B2 must have as many rows as A");
  }
  if (x0.size() != 0 && x0.size() != A.rows()) {
    throw std::invalid_argument("x0 must have the state dimension");
  }
}

NetworkModel::NetworkModel(PlantModel plant, std::vector<NodeMeasurement> nodes)
    : plant_(std::move(plant)), nodes_(std::move(nodes)) {
  plant_.validate();
  if (nodes_.empty()) {
    throw std::invalid_argument("network needs at least one node");
  }
  const int n = plant_.n();
  const int mw = plant_.m_w();
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const auto& nd = nodes_[i];
    const std::string tag = "node " + std::to_string(i + 1) + ": ";
    if (nd.C.rows() == 0 || nd.C.cols() != n) {
      throw std::invalid_argument(tag + "C must be r x n with r >= 1");
    }
    if (nd.D2.rows() != nd.C.rows() || nd.D2.cols() != mw) {
      throw std::invalid_argument(tag + "D2 must be r x m_w");
    }
    if (nd.Dbar2.rows() != nd.C.rows()) {
      throw std::invalid_argument(tag + "Dbar2 must have r rows");
    }
    if (nd.H.rows() == 0 || nd.H.cols() != n) {
      throw std::invalid_argument(tag + "H must be l x n with l >= 1");
    }
  }
}

const NodeMeasurement& NetworkModel::node(int i) const {
  if (i < 1 || i > node_count()) {
    throw std::out_of_range("node " + std::to_string(i) + " outside 1.." +
                            std::to_string(node_count()));
  }
  return nodes_[static_cast<size_t>(i - 1)];
}

Eigen::MatrixXd NetworkModel::input_matrix(int i) const {
  const auto& nd = node(i);
  Eigen::MatrixXd B(n(), m_w() + nd.m_v());
  B.leftCols(m_w()) = plant_.B2;
  B.rightCols(nd.m_v()).setZero();
  return B;
}

Eigen::MatrixXd NetworkModel::feed_matrix(int i) const {
  const auto& nd = node(i);
  Eigen::MatrixXd D(nd.r(), m_w() + nd.m_v());
  D.leftCols(m_w()) = nd.D2;
  D.rightCols(nd.m_v()) = nd.Dbar2;
  return D;
}

DisturbanceSignal::DisturbanceSignal(int dim, double support_end,
                                     Profile profile)
    : dim_(dim), support_end_(support_end), profile_(std::move(profile)) {
  if (dim_ < 0) {
    throw std::invalid_argument("signal dimension must be >= 0");
  }
  if (support_end_ < 0.0) {
    throw std::invalid_argument("support must not end before t = 0");
  }
}

Eigen::VectorXd DisturbanceSignal::operator()(double t) const {
  if (t < 0.0 || t >= support_end_ || dim_ == 0) {
    return Eigen::VectorXd::Zero(dim_);
  }
  Eigen::VectorXd out = profile_(t);
  if (out.size() != dim_) {
    throw std::logic_error("signal profile returned a wrong dimension");
  }
  return out;
}

DisturbanceSignal DisturbanceSignal::zero(int dim) {
  DisturbanceSignal s(dim, 0.0, nullptr);
  s.has_exact_energy_ = true;
  s.exact_energy_ = 0.0;
  return s;
}

DisturbanceSignal DisturbanceSignal::windowed_sinusoid(
    Eigen::VectorXd amplitude, Eigen::VectorXd frequency_hz,
    Eigen::VectorXd phase, double t_end) {
  const int dim = static_cast<int>(amplitude.size());
  if (frequency_hz.size() != dim || phase.size() != dim) {
    throw std::invalid_argument(
        "amplitude, frequency and phase must have equal length");
  }
  if (!(t_end > 0.0)) {
    throw std::invalid_argument("sinusoid window must have positive length");
  }
  DisturbanceSignal s(
      dim, t_end,
      [amplitude, frequency_hz, phase](double t) {
        Eigen::VectorXd out(amplitude.size());
        for (int c = 0; c < amplitude.size(); ++c) {
          out[c] =
              amplitude[c] * std::sin(kTwoPi * frequency_hz[c] * t + phase[c]);
        }
        return out;
      });
  // int_0^T a^2 sin^2(w t + phi) dt with w = 2 pi f:
  //   a^2 * (T/2 - (sin(2 w T + 2 phi) - sin(2 phi)) / (4 w)), w > 0.
  double energy = 0.0;
  for (int c = 0; c < dim; ++c) {
    const double a = amplitude[c];
    const double w = kTwoPi * frequency_hz[c];
    const double phi = phase[c];
    if (w == 0.0) {
      energy += a * a * std::sin(phi) * std::sin(phi) * t_end;
    } else {
      energy += a * a * (t_end / 2.0 -
                         (std::sin(2.0 * w * t_end + 2.0 * phi) -
                          std::sin(2.0 * phi)) /
                             (4.0 * w));
    }
  }
  s.has_exact_energy_ = true;
  s.exact_energy_ = energy;
  return s;
}

DisturbanceSignal DisturbanceSignal::piecewise_constant(
    std::vector<double> knots, Eigen::MatrixXd values) {
  if (knots.size() != static_cast<size_t>(values.cols()) + 1) {
    throw std::invalid_argument("need one more knot than value columns");
  }
  for (size_t k = 1; k < knots.size(); ++k) {
    if (!(knots[k] > knots[k - 1])) {
      throw std::invalid_argument("knots must strictly increase");
    }
  }
  if (knots.front() < 0.0) {
    throw std::invalid_argument("knots must start at t >= 0");
  }
  const int dim = static_cast<int>(values.rows());
  const double t_end = knots.back();
  double energy = 0.0;
  for (int k = 0; k < values.cols(); ++k) {
    energy += values.col(k).squaredNorm() *
              (knots[static_cast<size_t>(k) + 1] - knots[static_cast<size_t>(k)]);
  }
  DisturbanceSignal s(
      dim, t_end,
      [knots = std::move(knots), values = std::move(values)](double t) {
        auto it = std::upper_bound(knots.begin(), knots.end(), t);
        const long idx = static_cast<long>(it - knots.begin()) - 1;
        if (idx < 0 || idx >= values.cols()) {
          return Eigen::VectorXd::Zero(values.rows()).eval();
        }
        return values.col(idx).eval();
      });
  s.has_exact_energy_ = true;
  s.exact_energy_ = energy;
  return s;
}

DisturbanceSignal DisturbanceSignal::random_piecewise(int dim, double amplitude,
                                                      double step, double t_end,
                                                      std::uint64_t seed) {
  if (!(step > 0.0) || !(t_end > 0.0)) {
    throw std::invalid_argument("step and t_end must be positive");
  }
  const long pieces = static_cast<long>(std::ceil(t_end / step - 1e-9));
  std::vector<double> knots(static_cast<size_t>(pieces) + 1);
  for (long k = 0; k < pieces; ++k) {
    knots[static_cast<size_t>(k)] = static_cast<double>(k) * step;
  }
  knots.back() = t_end;
  Eigen::MatrixXd values(dim, pieces);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-amplitude, amplitude);
  for (long k = 0; k < pieces; ++k) {
    for (int c = 0; c < dim; ++c) {
      values(c, k) = dist(rng);
    }
  }
  return piecewise_constant(std::move(knots), std::move(values));
}

double l2_norm_squared(const DisturbanceSignal& s, double quad_step) {
  if (s.has_exact_energy_) {
    return s.exact_energy_;
  }
  if (s.support_end_ == 0.0 || s.dim_ == 0) {
    return 0.0;
  }
  if (!(quad_step > 0.0)) {
    throw std::invalid_argument("quadrature step must be positive");
  }
  // Composite Simpson on an even subdivision of the support.
  long m = static_cast<long>(std::ceil(s.support_end_ / quad_step));
  if (m % 2 != 0) {
    ++m;
  }
  const double h = s.support_end_ / static_cast<double>(m);
  auto f = [&s](double t) { return s(t).squaredNorm(); };
  double acc = f(0.0) + f(s.support_end_ - 1e-15 * (1.0 + s.support_end_));
  for (long k = 1; k < m; ++k) {
    acc += f(static_cast<double>(k) * h) * (k % 2 == 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

double NetworkDisturbance::stacked_energy() const {
  if (v.empty()) {
    throw std::logic_error("disturbance has no per-node noise channels");
  }
  double acc = static_cast<double>(v.size()) * l2_norm_squared(w);
  for (const auto& vi : v) {
    acc += l2_norm_squared(vi);
  }
  return acc;
}

void NetworkDisturbance::validate_against(const NetworkModel& model) const {
  if (w.dim() != model.m_w()) {
    throw std::invalid_argument("process disturbance has dimension " +
                                std::to_string(w.dim()) + ", model expects " +
                                std::to_string(model.m_w()));
  }
  if (static_cast<int>(v.size()) != model.node_count()) {
    throw std::invalid_argument("need one noise channel per node");
  }
  for (int i = 1; i <= model.node_count(); ++i) {
    if (v[static_cast<size_t>(i - 1)].dim() != model.m_v(i)) {
      throw std::invalid_argument("noise channel for node " +
                                  std::to_string(i) +
                                  " has the wrong dimension");
    }
  }
}

} // namespace rrhoc
