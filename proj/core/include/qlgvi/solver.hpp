#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "qlgvi/types.hpp"

namespace qlgvi {

using Residual3 = std::function<Vector3(const Vector3&)>;

struct BroydenConfig {
  // On the infinity norm of the residual. Conserved momenta drift by roughly
  // this much per step, so it sits near the roundoff floor.
  double tol_residual = 1e-14;
  int max_iter = 50;
  // Relative finite-difference step: the absolute step is fd_step * max(1, |x|).
  double fd_step = 1e-7;
  // Number of solves between finite-difference Jacobian rebuilds. 0 keeps the
  // Broyden estimate for the lifetime of the solver, rebuilding only on
  // failure; 1 rebuilds at every solve.
  int jacobian_refresh_interval = 0;

  // Throws ConfigError on a nonpositive tolerance, step or iteration count.
  void Validate() const;
};

struct SolveReport {
  int iterations = 0;
  double final_residual_norm = 0.0;
  bool converged = false;
  int jacobian_rebuilds = 0;
};

// The solve did not reach the tolerance, or the Jacobian estimate stayed
// singular after a rebuild.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolveReport report)
      : std::runtime_error(what), report_(report) {}
  const SolveReport& report() const { return report_; }

 private:
  SolveReport report_;
};

// Central-difference Jacobian: column i = [f(x + step e_i) - f(x - step e_i)] / (2 step).
Matrix3 FdJacobian(const Residual3& f, const Vector3& x, double step);

struct SolveResult {
  Vector3 x;
  SolveReport report;
};

// Good-Broyden root finder for R^3 -> R^3 residuals. The Jacobian estimate B
// is seeded by finite differences and corrected by the rank-1 secant update
//   B <- B + (df - B dx) dx^T / (dx^T dx),
// with each Newton step solved by LU. An instance keeps B between calls so a
// sequence of nearby problems (consecutive time steps) reuses it.
class BroydenSolver {
 public:
  explicit BroydenSolver(BroydenConfig config = {});

  // Throws SolverError on failure. A carried Jacobian that fails to converge
  // is discarded and the solve restarted once from x0 with a fresh one.
  SolveResult Solve(const Residual3& f, const Vector3& x0);

  const BroydenConfig& config() const { return config_; }
  const std::optional<Matrix3>& jacobian() const { return jacobian_; }
  void set_jacobian(const std::optional<Matrix3>& jacobian) { jacobian_ = jacobian; }
  void Reset() { jacobian_.reset(); }

 private:
  SolveResult Iterate(const Residual3& f, const Vector3& x0, SolveReport report);
  void Rebuild(const Residual3& f, const Vector3& x, SolveReport& report);

  BroydenConfig config_;
  std::optional<Matrix3> jacobian_;
  int solves_since_rebuild_ = 0;
};

// One-shot solve with a fresh finite-difference Jacobian.
SolveResult SolveBroyden(const Residual3& f, const Vector3& x0, const BroydenConfig& config);

}  // namespace qlgvi
