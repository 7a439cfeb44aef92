#pragma once

// Lie group variational integrator for a rigid body on R^3 x S^3.
//
// The attitude is a unit quaternion q with left-trivialized velocity
// q' = q (0, xi), so the body angular velocity is Omega = 2 xi and the
// Lagrangian reads
//   L = 1/2 m |x'|^2 + 2 xi^T J xi - V(x, q).
// The discrete Lagrangian pairs a midpoint rule with the relative attitude
// Im(q0* q1) ~ h xi:
//   L_d = h [1/2 m |(x1 - x0)/h|^2 + (2/h^2) Im(q0* q1)^T J Im(q0* q1)
//            - (V(x0, q0) + V(x1, q1)) / 2].
// Its discrete Euler-Lagrange equations give a two-step map on (x, q)
// pairs; the discrete Legendre transforms give the equivalent one-step map
// on (x, q, p, w) with w = 4 J xi = 2 J Omega. The unknown attitude update
// is parameterized as q1 = q0 exp(xi0), so no constraint or multiplier
// appears and q is never renormalized.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>

#include "qlgvi/body_model.hpp"
#include "qlgvi/quaternion.hpp"
#include "qlgvi/solver.hpp"
#include "qlgvi/types.hpp"

namespace qlgvi {

struct ContinuousState {
  Vector3 x = Vector3::Zero();
  UnitQuaternion q;
  Vector3 xdot = Vector3::Zero();
  Vector3 xi = Vector3::Zero();  // Omega / 2
};

struct ContinuousDerivative {
  Vector3 xdot = Vector3::Zero();
  Vector4 qdot = Vector4::Zero();  // q (0, xi) as a scalar-first 4-vector
  Vector3 xddot = Vector3::Zero();
  Vector3 xidot = Vector3::Zero();
};

// Right-hand side of the continuous Euler-Lagrange equations
//   m x'' = -dV/dx,
//   4 J xi' + 8 xi x (J xi) = -F(q) dV/dq,
//   q' = q (0, xi).
ContinuousDerivative ContinuousRhs(const ContinuousState& state, const RigidBodyModel& model);

struct HamiltonianState {
  Vector3 x = Vector3::Zero();
  UnitQuaternion q;
  Vector3 p = Vector3::Zero();
  Vector3 w = Vector3::Zero();  // left-trivialized angular momentum, 2 J Omega
};

// Selects how the implicit attitude residual is evaluated. With
// q1 = q0 exp(xi), the relative attitude q1* q0 is exactly exp(-xi), which
// reduces the residual to the closed form
//   (4/h) (c J u + u x J u),   (c, u) = exp(xi).
// kGeneral evaluates the literal G/F expression through q1 and serves as a
// cross-check. Its roundoff floor is about 1e-13, so it needs a solver
// tolerance of 1e-12 or looser.
enum class ResidualForm { kSimplified, kGeneral };

struct StepperConfig {
  double h = 0.01;
  BroydenConfig solver;
  ResidualForm residual_form = ResidualForm::kSimplified;

  void Validate() const;
};

// The converged relative rotation left the region where the exponential
// chart is trusted (|xi| >= pi/2); the time step is too large.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double DiscreteLagrangian(const Vector3& x0, const UnitQuaternion& q0, const Vector3& x1,
                          const UnitQuaternion& q1, const RigidBodyModel& model, double h);

struct DelResidual {
  Vector3 translational = Vector3::Zero();
  Vector3 rotational = Vector3::Zero();

  double InfNorm() const {
    return std::max(translational.cwiseAbs().maxCoeff(), rotational.cwiseAbs().maxCoeff());
  }
};

// Residual of the discrete Euler-Lagrange equations at the middle of a triple:
//   m (x2 - 2 x1 + x0) / h^2 + dV/dx(x1, q1),
//   G(q0* q1) J Im(q0* q1) + G(q2* q1) J Im(q2* q1) - (h^2/4) F(q1) dV/dq(x1, q1).
// Vanishes iff the triple is a discrete trajectory.
DelResidual ComputeDelResidual(const Vector3& x0, const UnitQuaternion& q0, const Vector3& x1,
                               const UnitQuaternion& q1, const Vector3& x2,
                               const UnitQuaternion& q2, const RigidBodyModel& model, double h);

struct DiscreteMomenta {
  Vector3 p = Vector3::Zero();
  Vector3 w = Vector3::Zero();
};

// Momenta at the end of the step (x0, q0) -> (x1, q1) (right discrete Legendre
// transform): p1 = m (x1 - x0)/h - (h/2) dV/dx(x1, q1),
//             w1 = (4/h) G(q0* q1) J Im(q0* q1) - (h/2) F(q1) dV/dq(x1, q1).
DiscreteMomenta RightLegendre(const Vector3& x0, const UnitQuaternion& q0, const Vector3& x1,
                              const UnitQuaternion& q1, const RigidBodyModel& model, double h);

// Momenta at the start of the step (left discrete Legendre transform):
//   p0 = m (x1 - x0)/h + (h/2) dV/dx(x0, q0),
//   w0 = -(4/h) G(q1* q0) J Im(q1* q0) + (h/2) F(q0) dV/dq(x0, q0).
DiscreteMomenta LeftLegendre(const Vector3& x0, const UnitQuaternion& q0, const Vector3& x1,
                             const UnitQuaternion& q1, const RigidBodyModel& model, double h);

// Solver state carried between steps; persisting it makes a restarted run
// reproduce an uninterrupted one bit for bit.
struct StepperCheckpoint {
  std::optional<Vector3> warm_start;
  std::optional<Matrix3> jacobian;
};

// One-step map on (x, q, p, w):
//   x1 = x0 + (h/m) (p0 - (h/2) dV/dx(x0, q0))
//   solve for xi0:  w0 = -(4/h) G(q1* q0) J Im(q1* q0) + (h/2) F(q0) dV/dq(x0, q0),
//                   q1 = q0 exp(xi0)
//   p1 = p0 - (h/2) (dV/dx(x0, q0) + dV/dx(x1, q1))
//   w1 = (4/h) G(q0* q1) J Im(q0* q1) - (h/2) F(q1) dV/dq(x1, q1)
// The first solve starts from xi = (h/4) J^-1 w0, later ones from the previous
// step's xi. The Broyden Jacobian is carried from step to step.
class HamiltonianStepper {
 public:
  HamiltonianStepper(RigidBodyModel model, StepperConfig config);

  // Throws SolverError, StepSizeError, or SingularityError. On error the
  // stepper state is left as it was before the call.
  HamiltonianState Step(const HamiltonianState& state);

  const RigidBodyModel& model() const { return model_; }
  const StepperConfig& config() const { return config_; }
  const SolveReport& last_report() const { return last_report_; }
  // Converged xi0 of the last step.
  const Vector3& last_xi() const { return last_xi_; }

  StepperCheckpoint Checkpoint() const;
  void Restore(const StepperCheckpoint& checkpoint);

 private:
  RigidBodyModel model_;
  StepperConfig config_;
  BroydenSolver solver_;
  std::optional<Vector3> warm_start_;
  Vector3 last_xi_ = Vector3::Zero();
  SolveReport last_report_;
};

// Single step with a fresh solver and the first-step warm start.
HamiltonianState HamiltonianStep(const HamiltonianState& state, const RigidBodyModel& model,
                                 const StepperConfig& config);

struct Configuration {
  Vector3 x = Vector3::Zero();
  UnitQuaternion q;
};

// Two-step map: given (x0, q0), (x1, q1) returns (x2, q2) solving the discrete
// Euler-Lagrange equations,
//   x2 = 2 x1 - x0 - (h^2/m) dV/dx(x1, q1),
//   q2 = q1 exp(xi) with xi the root of the attitude equation.
// The attitude residual is solved scaled by 4/h, i.e. in momentum units, so
// solver tolerances mean the same as on the Hamiltonian side.
class LagrangianStepper {
 public:
  LagrangianStepper(RigidBodyModel model, StepperConfig config);

  Configuration Step(const Configuration& previous, const Configuration& current);

  const SolveReport& last_report() const { return last_report_; }
  // Only the Jacobian is carried; the warm start comes from the inputs.
  StepperCheckpoint Checkpoint() const { return {std::nullopt, solver_.jacobian()}; }
  void Restore(const StepperCheckpoint& checkpoint) { solver_.set_jacobian(checkpoint.jacobian); }
  const Vector3& last_xi() const { return last_xi_; }

 private:
  RigidBodyModel model_;
  StepperConfig config_;
  BroydenSolver solver_;
  Vector3 last_xi_ = Vector3::Zero();
  SolveReport last_report_;
};

Configuration LagrangianStep(const Configuration& previous, const Configuration& current,
                             const RigidBodyModel& model, const StepperConfig& config);

// (x0, q0, p0 = m xdot0, w0 = 2 J Omega0).
HamiltonianState LegendreLift(const Vector3& x0, const UnitQuaternion& q0, const Vector3& xdot0,
                              const Vector3& omega0, const InertiaPair& inertia);
// As above with the attitude given as a rotation matrix, lifted to S^3.
HamiltonianState LegendreLift(const Vector3& x0, const Matrix3& r0, const Vector3& xdot0,
                              const Vector3& omega0, const InertiaPair& inertia);

struct TangentState {
  Matrix3 rotation = Matrix3::Identity();
  Vector3 xdot = Vector3::Zero();
  Vector3 omega = Vector3::Zero();
};

// R = pi(q), xdot = p/m, Omega = 1/2 J^-1 w.
TangentState ProjectToSe3(const HamiltonianState& state, const InertiaPair& inertia);

}  // namespace qlgvi
