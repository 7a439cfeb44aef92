#include "qlgvi/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/LU>

#include "qlgvi/errors.hpp"

namespace qlgvi {
namespace {

constexpr double kMinReciprocalCondition = 1e-14;

// Secant updates from steps this small (relative to max(1, |x|)) only see
// residual roundoff and would corrupt the Jacobian estimate.
constexpr double kMinUpdateStep = 1e-10;

double InfNorm(const Vector3& r) { return r.cwiseAbs().maxCoeff(); }

}  // namespace

void BroydenConfig::Validate() const {
  if (!(tol_residual > 0.0)) throw ConfigError("solver.tol must be positive");
  if (max_iter < 1) throw ConfigError("solver.max_iter must be at least 1");
  if (!(fd_step > 0.0)) throw ConfigError("solver.fd_step must be positive");
  if (jacobian_refresh_interval < 0) {
    throw ConfigError("solver.jacobian_refresh_interval must be nonnegative");
  }
}

Matrix3 FdJacobian(const Residual3& f, const Vector3& x, double step) {
  if (!(step > 0.0)) {
    throw DomainError("finite-difference step must be positive");
  }
  Matrix3 jac;
  for (int i = 0; i < 3; ++i) {
    const Vector3 dx = step * Vector3::Unit(i);
    jac.col(i) = (f(x + dx) - f(x - dx)) / (2.0 * step);
  }
  return jac;
}

BroydenSolver::BroydenSolver(BroydenConfig config) : config_(config) { config_.Validate(); }

void BroydenSolver::Rebuild(const Residual3& f, const Vector3& x, SolveReport& report) {
  jacobian_ = FdJacobian(f, x, config_.fd_step * std::max(1.0, x.norm()));
  solves_since_rebuild_ = 0;
  ++report.jacobian_rebuilds;
}

SolveResult BroydenSolver::Solve(const Residual3& f, const Vector3& x0) {
  SolveReport report;
  const bool refresh_due = config_.jacobian_refresh_interval > 0 &&
                           solves_since_rebuild_ >= config_.jacobian_refresh_interval;
  const bool fresh = !jacobian_ || refresh_due;
  if (fresh) {
    Rebuild(f, x0, report);
  }
  ++solves_since_rebuild_;
  try {
    return Iterate(f, x0, report);
  } catch (const SolverError& e) {
    if (fresh) throw;
    report = e.report();
    report.converged = false;
  }
  Rebuild(f, x0, report);
  return Iterate(f, x0, report);
}

SolveResult BroydenSolver::Iterate(const Residual3& f, const Vector3& x0, SolveReport report) {
  Vector3 x = x0;
  Vector3 fx = f(x);
  report.final_residual_norm = InfNorm(fx);
  if (!fx.allFinite()) {
    throw SolverError("residual is not finite at the initial guess", report);
  }
  bool rebuilt_for_singularity = false;
  for (int k = 0; k < config_.max_iter; ++k) {
    if (report.final_residual_norm <= config_.tol_residual) {
      report.converged = true;
      return {x, report};
    }
    Eigen::PartialPivLU<Matrix3> lu(*jacobian_);
    if (!(lu.rcond() > kMinReciprocalCondition)) {
      if (rebuilt_for_singularity) {
        throw SolverError("Broyden Jacobian estimate is singular", report);
      }
      Rebuild(f, x, report);
      rebuilt_for_singularity = true;
      --k;
      continue;
    }
    const Vector3 dx = lu.solve(-fx);
    const Vector3 x_next = x + dx;
    const Vector3 f_next = f(x_next);
    ++report.iterations;
    const double dx2 = dx.squaredNorm();
    if (dx.norm() > kMinUpdateStep * std::max(1.0, x.norm())) {
      *jacobian_ += ((f_next - fx) - *jacobian_ * dx) * dx.transpose() / dx2;
    }
    x = x_next;
    fx = f_next;
    report.final_residual_norm = InfNorm(fx);
    if (!fx.allFinite()) {
      throw SolverError("residual became non-finite", report);
    }
  }
  if (report.final_residual_norm <= config_.tol_residual) {
    report.converged = true;
    return {x, report};
  }
  std::ostringstream msg;
  msg << "Broyden solve did not converge in " << config_.max_iter
      << " iterations (|f|_inf = " << report.final_residual_norm << ")";
  throw SolverError(msg.str(), report);
}

SolveResult SolveBroyden(const Residual3& f, const Vector3& x0, const BroydenConfig& config) {
  BroydenSolver solver(config);
  return solver.Solve(f, x0);
}

}  // namespace qlgvi
