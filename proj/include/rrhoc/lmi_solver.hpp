#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rrhoc {

/// Flat parameterisation of the decision variables of one LMI problem.
/// Symmetric matrices are stored as packed upper triangles so the solver
/// never leaves the symmetric subspace.
class VariableLayout {
public:
  int add_symmetric(std::string name, int n);
  int add_matrix(std::string name, int rows, int cols);
  int add_scalar(std::string name);

  int dimension() const { return dim_; }
  int count() const { return static_cast<int>(vars_.size()); }
  const std::string& name(int handle) const;

  Eigen::MatrixXd matrix(int handle, const Eigen::VectorXd& x) const;
  double scalar(int handle, const Eigen::VectorXd& x) const;
  void set_matrix(int handle, const Eigen::MatrixXd& value,
                  Eigen::VectorXd& x) const;
  void set_scalar(int handle, double value, Eigen::VectorXd& x) const;

private:
  enum class Kind { Symmetric, Full, Scalar };
  struct Var {
    std::string name;
    Kind kind;
    int rows = 0;
    int cols = 0;
    int offset = 0;
    int count = 0;
  };
  const Var& at(int handle) const;

  std::vector<Var> vars_;
  int dim_ = 0;
};

enum class ConstraintKind {
  /// lambda_max(F(x)) <= -margin, margin = 1e-6 * max(1, ||F(x)||_F).
  NegativeDefinite,
  /// lambda_min(F(x)) >= -tol, tol = 1e-9 * max(1, ||F(x)||_F).
  PositiveSemidefinite,
};

/// One matrix constraint given by a builder that must be affine in x and
/// return a symmetric matrix.
struct ConstraintSpec {
  std::string name;
  ConstraintKind kind;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> build;
};

struct LmiProblem {
  VariableLayout layout;
  std::vector<ConstraintSpec> constraints;
};

/// Relative margins shared by the solve-time success test and the
/// independent verification pass.
inline constexpr double kNegDefMarginRel = 1e-6;
inline constexpr double kPsdTolRel = 1e-9;

/// Affine expansion F_j(x) = F0_j + sum_l x_l F_{j,l}, extracted by unit
/// probes and cross-checked at random points, with the least-squares
/// factorisation used by the projection step cached.
class CompiledProblem {
public:
  int constraint_count() const { return static_cast<int>(cons_.size()); }
  int dimension() const { return dim_; }
  const std::string& constraint_name(int j) const { return cons_[j].name; }
  ConstraintKind constraint_kind(int j) const { return cons_[j].kind; }

  Eigen::MatrixXd evaluate(int j, const Eigen::VectorXd& x) const;

  /// x minimising sum_j ||F_j(x) - target_j||_F^2.
  Eigen::VectorXd least_squares_fit(
      const std::vector<Eigen::MatrixXd>& targets) const;

private:
  friend CompiledProblem compile(const LmiProblem& problem);

  struct Compiled {
    std::string name;
    ConstraintKind kind;
    int size = 0;
    Eigen::MatrixXd f0;
    std::vector<std::pair<int, Eigen::MatrixXd>> terms;
  };

  int dim_ = 0;
  std::vector<Compiled> cons_;
  Eigen::VectorXd offset_;
  Eigen::MatrixXd basis_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> lsq_;
};

/// Builds the affine expansion. Throws if a builder is not affine, not
/// symmetric, produces NaNs, or depends on nothing.
CompiledProblem compile(const LmiProblem& problem);

struct SolveBudget {
  long max_iterations = 4000;
  /// Iterations without meaningful residual progress before the solver
  /// tightens its margin phase or gives up.
  int stall_window = 60;
  double stall_improvement = 1e-10;
  /// Cone deepening offsets tried in order; the final phase must be 0.
  std::vector<double> stuffing = {1e-2, 1e-3, 1e-4, 0.0};
};

enum class SolveStatus {
  Feasible,
  /// Projections plateaued at a positive infeasibility gap. Not a proof
  /// of infeasibility, only the honest outcome of the budget.
  InfeasibleWithinBudget,
  BudgetExhausted,
};

const char* to_string(SolveStatus status);

struct SolveOutcome {
  SolveStatus status = SolveStatus::BudgetExhausted;
  Eigen::VectorXd x;
  long iterations = 0;
  /// Sum of Frobenius distances to the true cones at the final iterate.
  double residual = 0.0;
  std::string message;
};

/// Alternating projections between the affine range of the constraint map
/// and the product of shifted spectral cones.
SolveOutcome solve_feasibility(const CompiledProblem& compiled,
                               const SolveBudget& budget = {},
                               const std::optional<Eigen::VectorXd>& x0 = {});

/// Optional line-oriented diagnostics sink (one call per finished solve).
/// Null disables logging; the default is null.
void set_solver_log_sink(std::function<void(const std::string&)> sink);

struct ConstraintCheck {
  std::string name;
  ConstraintKind kind = ConstraintKind::NegativeDefinite;
  /// lambda_max for NegativeDefinite, lambda_min for PositiveSemidefinite.
  double eigenvalue = 0.0;
  double bound = 0.0;
  bool ok = false;
};

struct VerifyReport {
  bool ok = false;
  std::vector<ConstraintCheck> checks;
};

/// Re-evaluates every constraint through its original builder, ignoring
/// the compiled expansion, and applies the documented margins.
VerifyReport verify_solution(const LmiProblem& problem,
                             const Eigen::VectorXd& x);

} // namespace rrhoc
