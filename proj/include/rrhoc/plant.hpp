#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rrhoc {

/// Continuous-time linear plant  xdot = A x + B2 w, started at x0
/// (empty x0 means the origin).
struct PlantModel {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B2;
  Eigen::VectorXd x0;

  int n() const { return static_cast<int>(A.rows()); }
  int m_w() const { return static_cast<int>(B2.cols()); }
  Eigen::VectorXd initial_state() const {
    return x0.size() == 0 ? Eigen::VectorXd::Zero(n()) : x0;
  }

  /// Throws std::invalid_argument on shape mismatches.
  void validate() const;
};

/// Per-node sensing and coupling data:
///   y_i = C x + D2 w + Dbar2 v_i, coupling output H x.
struct NodeMeasurement {
  Eigen::MatrixXd C;
  Eigen::MatrixXd D2;
  Eigen::MatrixXd Dbar2;
  Eigen::MatrixXd H;

  int r() const { return static_cast<int>(C.rows()); }
  int m_v() const { return static_cast<int>(Dbar2.cols()); }
  int l() const { return static_cast<int>(H.rows()); }
};

/// Plant plus one measurement block per observer node. Immutable after
/// construction; node ids are 1-based to line up with the graph.
class NetworkModel {
public:
  NetworkModel(PlantModel plant, std::vector<NodeMeasurement> nodes);

  const PlantModel& plant() const { return plant_; }
  int n() const { return plant_.n(); }
  int m_w() const { return plant_.m_w(); }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const NodeMeasurement& node(int i) const;
  int m_v(int i) const { return node(i).m_v(); }

  /// [B2 0] acting on the stacked disturbance [w; v_i].
  Eigen::MatrixXd input_matrix(int i) const;
  /// [D2 Dbar2] acting on the stacked disturbance [w; v_i].
  Eigen::MatrixXd feed_matrix(int i) const;

private:
  PlantModel plant_;
  std::vector<NodeMeasurement> nodes_;
};

/// Finite-energy disturbance channel. The signal is identically zero for
/// t < 0 and t >= support_end(); evaluation inside the support delegates
/// to the stored profile. Common profiles carry their exact L2 energy so
/// certification ratios do not depend on quadrature error.
class DisturbanceSignal {
public:
  using Profile = std::function<Eigen::VectorXd(double)>;

  /// General profile; energy computed by quadrature when asked.
  DisturbanceSignal(int dim, double support_end, Profile profile);

  int dim() const { return dim_; }
  double support_end() const { return support_end_; }
  bool has_exact_energy() const { return has_exact_energy_; }

  Eigen::VectorXd operator()(double t) const;

  static DisturbanceSignal zero(int dim);

  /// Channel c: amplitude[c] * sin(2*pi*frequency_hz[c]*t + phase[c]) on
  /// [0, t_end). Exact energy from the closed-form antiderivative.
  static DisturbanceSignal windowed_sinusoid(Eigen::VectorXd amplitude,
                                             Eigen::VectorXd frequency_hz,
                                             Eigen::VectorXd phase,
                                             double t_end);

  /// values.col(k) held on [knots[k], knots[k+1]); zero outside
  /// [knots.front(), knots.back()). Requires knots.size() == cols + 1.
  static DisturbanceSignal piecewise_constant(std::vector<double> knots,
                                              Eigen::MatrixXd values);

  /// Piecewise-constant on a uniform grid with i.i.d. U(-amplitude,
  /// amplitude) levels drawn once at construction from the given seed.
  static DisturbanceSignal random_piecewise(int dim, double amplitude,
                                            double step, double t_end,
                                            std::uint64_t seed);

private:
  int dim_ = 0;
  double support_end_ = 0.0;
  Profile profile_;
  bool has_exact_energy_ = false;
  double exact_energy_ = 0.0;

  friend double l2_norm_squared(const DisturbanceSignal&, double);
};

/// Integral of the squared norm over the support. Uses the stored exact
/// value when the factory provided one, otherwise composite Simpson with
/// the given step.
double l2_norm_squared(const DisturbanceSignal& s, double quad_step = 1e-4);

/// One disturbance realisation for the whole network: a shared process
/// disturbance plus one measurement-noise channel per node.
struct NetworkDisturbance {
  std::string name;
  DisturbanceSignal w;
  std::vector<DisturbanceSignal> v;

  /// N*||w||^2 + sum_i ||v_i||^2, the energy the performance ratio divides
  /// by. Throws if v is empty.
  double stacked_energy() const;

  /// Shape check against a model; throws with the offending node id.
  void validate_against(const NetworkModel& model) const;
};

} // namespace rrhoc
