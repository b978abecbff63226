#include "rrhoc/lmi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rrhoc {

namespace {

double frob_scale(const Eigen::MatrixXd& m) {
  return std::max(1.0, m.norm());
}

// Distance to the margin-shifted cone plus the clipped projection.
struct ConeResult {
  Eigen::MatrixXd projected;
  double distance = 0.0;
};

ConeResult project_cone(const Eigen::MatrixXd& m, ConstraintKind kind,
                        double extra_depth) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const double scale = frob_scale(m);
  Eigen::VectorXd lam = eig.eigenvalues();
  double dist_sq = 0.0;
  if (kind == ConstraintKind::NegativeDefinite) {
    const double cap = -kNegDefMarginRel * scale - extra_depth;
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      if (lam[k] > cap) {
        dist_sq += (lam[k] - cap) * (lam[k] - cap);
        lam[k] = cap;
      }
    }
  } else {
    const double floor = extra_depth; // project onto the exact cone, deepened
    for (Eigen::Index k = 0; k < lam.size(); ++k) {
      if (lam[k] < floor) {
        dist_sq += (lam[k] - floor) * (lam[k] - floor);
        lam[k] = floor;
      }
    }
  }
  ConeResult out;
  out.projected =
      eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  out.distance = std::sqrt(dist_sq);
  return out;
}

bool satisfied(const Eigen::MatrixXd& m, ConstraintKind kind,
               double* eigenvalue_out = nullptr, double* bound_out = nullptr) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      m, Eigen::EigenvaluesOnly);
  const double scale = frob_scale(m);
  if (kind == ConstraintKind::NegativeDefinite) {
    const double top = eig.eigenvalues().maxCoeff();
    const double bound = -kNegDefMarginRel * scale;
    if (eigenvalue_out) {
      *eigenvalue_out = top;
    }
    if (bound_out) {
      *bound_out = bound;
    }
    return top <= bound;
  }
  const double bottom = eig.eigenvalues().minCoeff();
  const double bound = -kPsdTolRel * scale;
  if (eigenvalue_out) {
    *eigenvalue_out = bottom;
  }
  if (bound_out) {
    *bound_out = bound;
  }
  return bottom >= bound;
}

} // namespace

int VariableLayout::add_symmetric(std::string name, int n) {
  if (n < 1) {
    throw std::invalid_argument("symmetric variable needs n >= 1");
  }
  Var v;
  v.name = std::move(name);
  v.kind = Kind::Symmetric;
  v.rows = v.cols = n;
  v.offset = dim_;
  v.count = n * (n + 1) / 2;
  dim_ += v.count;
  vars_.push_back(std::move(v));
  return count() - 1;
}

int VariableLayout::add_matrix(std::string name, int rows, int cols) {
  if (rows < 1 || cols < 0) {
    throw std::invalid_argument("matrix variable needs rows >= 1, cols >= 0");
  }
  Var v;
  v.name = std::move(name);
  v.kind = Kind::Full;
  v.rows = rows;
  v.cols = cols;
  v.offset = dim_;
  v.count = rows * cols;
  dim_ += v.count;
  vars_.push_back(std::move(v));
  return count() - 1;
}

int VariableLayout::add_scalar(std::string name) {
  Var v;
  v.name = std::move(name);
  v.kind = Kind::Scalar;
  v.rows = v.cols = 1;
  v.offset = dim_;
  v.count = 1;
  dim_ += 1;
  vars_.push_back(std::move(v));
  return count() - 1;
}

const VariableLayout::Var& VariableLayout::at(int handle) const {
  if (handle < 0 || handle >= count()) {
    throw std::out_of_range("variable handle " + std::to_string(handle));
  }
  return vars_[static_cast<size_t>(handle)];
}

const std::string& VariableLayout::name(int handle) const {
  return at(handle).name;
}

Eigen::MatrixXd VariableLayout::matrix(int handle,
                                       const Eigen::VectorXd& x) const {
  const Var& v = at(handle);
  if (x.size() != dim_) {
    throw std::invalid_argument("variable vector has wrong length");
  }
  Eigen::MatrixXd m(v.rows, v.cols);
  if (v.kind == Kind::Symmetric) {
    int idx = v.offset;
    for (int j = 0; j < v.cols; ++j) {
      for (int i = 0; i <= j; ++i) {
        m(i, j) = x[idx];
        m(j, i) = x[idx];
        ++idx;
      }
    }
  } else if (v.kind == Kind::Full) {
    for (int j = 0; j < v.cols; ++j) {
      for (int i = 0; i < v.rows; ++i) {
        m(i, j) = x[v.offset + j * v.rows + i];
      }
    }
  } else {
    m(0, 0) = x[v.offset];
  }
  return m;
}

double VariableLayout::scalar(int handle, const Eigen::VectorXd& x) const {
  const Var& v = at(handle);
  if (v.kind != Kind::Scalar) {
    throw std::logic_error("variable " + v.name + " is not a scalar");
  }
  return x[v.offset];
}

void VariableLayout::set_matrix(int handle, const Eigen::MatrixXd& value,
                                Eigen::VectorXd& x) const {
  const Var& v = at(handle);
  if (value.rows() != v.rows || value.cols() != v.cols) {
    throw std::invalid_argument("shape mismatch writing " + v.name);
  }
  if (x.size() != dim_) {
    throw std::invalid_argument("variable vector has wrong length");
  }
  if (v.kind == Kind::Symmetric) {
    const Eigen::MatrixXd sym = 0.5 * (value + value.transpose());
    int idx = v.offset;
    for (int j = 0; j < v.cols; ++j) {
      for (int i = 0; i <= j; ++i) {
        x[idx++] = sym(i, j);
      }
    }
  } else if (v.kind == Kind::Full) {
    for (int j = 0; j < v.cols; ++j) {
      for (int i = 0; i < v.rows; ++i) {
        x[v.offset + j * v.rows + i] = value(i, j);
      }
    }
  } else {
    x[v.offset] = value(0, 0);
  }
}

void VariableLayout::set_scalar(int handle, double value,
                                Eigen::VectorXd& x) const {
  const Var& v = at(handle);
  if (v.kind != Kind::Scalar) {
    throw std::logic_error("variable " + v.name + " is not a scalar");
  }
  x[v.offset] = value;
}

const char* to_string(SolveStatus status) {
  switch (status) {
  case SolveStatus::Feasible:
    return "feasible";
  case SolveStatus::InfeasibleWithinBudget:
    return "infeasible_within_budget";
  case SolveStatus::BudgetExhausted:
    return "budget_exhausted";
  }
  return "unknown";
}

Eigen::MatrixXd CompiledProblem::evaluate(int j,
                                          const Eigen::VectorXd& x) const {
  const Compiled& c = cons_[static_cast<size_t>(j)];
  Eigen::MatrixXd m = c.f0;
  for (const auto& [var, coeff] : c.terms) {
    m += x[var] * coeff;
  }
  return m;
}

Eigen::VectorXd CompiledProblem::least_squares_fit(
    const std::vector<Eigen::MatrixXd>& targets) const {
  if (targets.size() != cons_.size()) {
    throw std::invalid_argument("one target per constraint expected");
  }
  Eigen::VectorXd rhs(offset_.size());
  Eigen::Index at = 0;
  for (size_t j = 0; j < cons_.size(); ++j) {
    const Eigen::Index entries = targets[j].size();
    rhs.segment(at, entries) =
        Eigen::Map<const Eigen::VectorXd>(targets[j].data(), entries) -
        offset_.segment(at, entries);
    at += entries;
  }
  return lsq_.solve(rhs);
}

CompiledProblem compile(const LmiProblem& problem) {
  const int dim = problem.layout.dimension();
  if (dim == 0) {
    throw std::invalid_argument("problem has no decision variables");
  }
  if (problem.constraints.empty()) {
    throw std::invalid_argument("problem has no constraints");
  }

  CompiledProblem out;
  out.dim_ = dim;

  Eigen::Index total_entries = 0;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
  for (const auto& spec : problem.constraints) {
    CompiledProblem::Compiled c;
    c.name = spec.name;
    c.kind = spec.kind;
    c.f0 = spec.build(zero);
    if (c.f0.rows() != c.f0.cols()) {
      throw std::invalid_argument("constraint " + spec.name +
                                  " is not square");
    }
    if (!c.f0.allFinite()) {
      throw std::invalid_argument(
          "constraint " + spec.name +
          " produced a non-finite entry; a scalar was left symbolic");
    }
    if ((c.f0 - c.f0.transpose()).cwiseAbs().maxCoeff() >
        1e-9 * frob_scale(c.f0)) {
      throw std::invalid_argument("constraint " + spec.name +
                                  " is not symmetric");
    }
    c.size = static_cast<int>(c.f0.rows());
    Eigen::VectorXd probe = zero;
    for (int l = 0; l < dim; ++l) {
      probe[l] = 1.0;
      Eigen::MatrixXd fl = spec.build(probe) - c.f0;
      probe[l] = 0.0;
      if (!fl.allFinite()) {
        throw std::invalid_argument("constraint " + spec.name +
                                    " produced a non-finite entry");
      }
      if (fl.cwiseAbs().maxCoeff() > 0.0) {
        c.terms.emplace_back(l, std::move(fl));
      }
    }
    if (c.terms.empty()) {
      throw std::invalid_argument("constraint " + spec.name +
                                  " does not depend on any variable");
    }
    total_entries += c.f0.size();
    out.cons_.push_back(std::move(c));
  }

  out.offset_.resize(total_entries);
  out.basis_ = Eigen::MatrixXd::Zero(total_entries, dim);
  Eigen::Index at = 0;
  for (const auto& c : out.cons_) {
    const Eigen::Index entries = c.f0.size();
    out.offset_.segment(at, entries) =
        Eigen::Map<const Eigen::VectorXd>(c.f0.data(), entries);
    for (const auto& [var, coeff] : c.terms) {
      out.basis_.col(var).segment(at, entries) =
          Eigen::Map<const Eigen::VectorXd>(coeff.data(), entries);
    }
    at += entries;
  }
  out.lsq_.compute(out.basis_);

  // The projection step silently assumes affinity; check it at a few
  // reproducible random points before trusting the expansion.
  std::mt19937_64 rng(0x5eedbeefULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int round = 0; round < 3; ++round) {
    Eigen::VectorXd x(dim);
    for (int l = 0; l < dim; ++l) {
      x[l] = dist(rng);
    }
    for (size_t j = 0; j < out.cons_.size(); ++j) {
      const Eigen::MatrixXd direct =
          problem.constraints[j].build(x);
      const Eigen::MatrixXd expanded = out.evaluate(static_cast<int>(j), x);
      const double err = (direct - expanded).cwiseAbs().maxCoeff();
      if (err > 1e-10 * frob_scale(direct)) {
        throw std::invalid_argument("constraint " +
                                    problem.constraints[j].name +
                                    " is not affine in the variables");
      }
    }
  }
  return out;
}

namespace {
std::function<void(const std::string&)>& solver_log_sink() {
  static std::function<void(const std::string&)> sink;
  return sink;
}

void emit_solve_log(const SolveOutcome& out) {
  if (const auto& sink = solver_log_sink()) {
    sink(std::string("solve: status=") + to_string(out.status) +
         " iterations=" + std::to_string(out.iterations) +
         " residual=" + std::to_string(out.residual));
  }
}
} // namespace

void set_solver_log_sink(std::function<void(const std::string&)> sink) {
  solver_log_sink() = std::move(sink);
}

SolveOutcome solve_feasibility(const CompiledProblem& compiled,
                               const SolveBudget& budget,
                               const std::optional<Eigen::VectorXd>& x0) {
  if (budget.stuffing.empty() || budget.stuffing.back() != 0.0) {
    throw std::invalid_argument("stuffing schedule must end with 0");
  }
  Eigen::VectorXd x =
      x0.value_or(Eigen::VectorXd::Zero(compiled.dimension()));
  if (x.size() != compiled.dimension()) {
    throw std::invalid_argument("warm start has wrong dimension");
  }

  SolveOutcome out;
  size_t phase = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  long since_progress = 0;
  std::vector<Eigen::MatrixXd> targets(
      static_cast<size_t>(compiled.constraint_count()));

  for (long it = 0; it < budget.max_iterations; ++it) {
    out.iterations = it + 1;
    bool all_ok = true;
    double residual = 0.0;
    for (int j = 0; j < compiled.constraint_count(); ++j) {
      Eigen::MatrixXd m = compiled.evaluate(j, x);
      const ConstraintKind kind = compiled.constraint_kind(j);
      if (!satisfied(m, kind)) {
        all_ok = false;
      }
      // Residual against the exact cones, not the deepened ones, so the
      // stall test measures true infeasibility.
      residual += project_cone(m, kind, 0.0).distance;
      const double depth =
          budget.stuffing[phase] * frob_scale(m);
      targets[static_cast<size_t>(j)] =
          project_cone(m, kind, depth).projected;
    }
    out.residual = residual;
    if (all_ok) {
      out.status = SolveStatus::Feasible;
      out.x = x;
      out.message = "all constraints within margin";
      emit_solve_log(out);
      return out;
    }

    if (residual < best_residual - budget.stall_improvement *
                                       std::max(1.0, best_residual)) {
      best_residual = residual;
      since_progress = 0;
    } else {
      ++since_progress;
    }
    if (since_progress >= budget.stall_window) {
      if (phase + 1 < budget.stuffing.size()) {
        ++phase;
        since_progress = 0;
      } else {
        out.status = SolveStatus::InfeasibleWithinBudget;
        out.x = x;
        out.message = "projection residual plateaued at " +
                      std::to_string(residual);
        emit_solve_log(out);
        return out;
      }
    }

    x = compiled.least_squares_fit(targets);
  }

  out.status = SolveStatus::BudgetExhausted;
  out.x = x;
  out.message = "iteration budget exhausted";
  emit_solve_log(out);
  return out;
}

VerifyReport verify_solution(const LmiProblem& problem,
                             const Eigen::VectorXd& x) {
  VerifyReport report;
  report.ok = true;
  for (const auto& spec : problem.constraints) {
    ConstraintCheck check;
    check.name = spec.name;
    check.kind = spec.kind;
    const Eigen::MatrixXd m = spec.build(x);
    check.ok = satisfied(m, spec.kind, &check.eigenvalue, &check.bound);
    report.ok = report.ok && check.ok;
    report.checks.push_back(std::move(check));
  }
  return report;
}

} // namespace rrhoc
