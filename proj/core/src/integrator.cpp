#include "qlgvi/integrator.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "qlgvi/errors.hpp"

namespace qlgvi {
namespace {

// |xi| beyond which a step is rejected.
constexpr double kMaxChartAngle = std::numbers::pi / 2.0;

// G(a) J Im(a) for a relative attitude a.
Vector3 RelativeMomentum(const Quaternion& a, const Matrix3& j) {
  return GMatrix(a) * (j * a.v());
}

Vector3 TangentGradient(const PotentialGradient& g, const Quaternion& q) {
  return FMatrix(q) * g.q;
}

void CheckChart(const Vector3& xi) {
  if (!(xi.norm() < kMaxChartAngle)) {
    std::ostringstream msg;
    msg << "relative rotation |xi| = " << xi.norm()
        << " left the exponential chart; reduce the time step";
    throw StepSizeError(msg.str());
  }
}

}  // namespace

void StepperConfig::Validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw ConfigError("time step h must be positive and finite");
  }
  solver.Validate();
}

ContinuousDerivative ContinuousRhs(const ContinuousState& state, const RigidBodyModel& model) {
  const PotentialGradient g = model.potential().Gradient(state.x, state.q);
  const Matrix3& j = model.inertia();
  ContinuousDerivative d;
  d.xdot = state.xdot;
  d.qdot = (state.q.quaternion() * Quaternion::Pure(state.xi)).ToVector4();
  d.xddot = -g.x / model.mass();
  const Vector3 torque = -TangentGradient(g, state.q) - 8.0 * state.xi.cross(j * state.xi);
  d.xidot = 0.25 * (model.inverse_inertia() * torque);
  return d;
}

double DiscreteLagrangian(const Vector3& x0, const UnitQuaternion& q0, const Vector3& x1,
                          const UnitQuaternion& q1, const RigidBodyModel& model, double h) {
  const Vector3 velocity = (x1 - x0) / h;
  const Vector3 rel = (Conjugate(q0) * q1.quaternion()).v();
  const double kinetic =
      0.5 * model.mass() * velocity.squaredNorm() + (2.0 / (h * h)) * rel.dot(model.inertia() * rel);
  const double potential = 0.5 * (model.potential().Value(x0, q0) + model.potential().Value(x1, q1));
  return h * (kinetic - potential);
}

DelResidual ComputeDelResidual(const Vector3& x0, const UnitQuaternion& q0, const Vector3& x1,
                               const UnitQuaternion& q1, const Vector3& x2,
                               const UnitQuaternion& q2, const RigidBodyModel& model, double h) {
  const PotentialGradient g1 = model.potential().Gradient(x1, q1);
  const Matrix3& j = model.inertia();
  DelResidual r;
  r.translational = model.mass() * ((x2 - x1) - (x1 - x0)) / (h * h) + g1.x;
  r.rotational = RelativeMomentum(Conjugate(q0) * q1.quaternion(), j) +
                 RelativeMomentum(Conjugate(q2) * q1.quaternion(), j) -
                 (h * h / 4.0) * TangentGradient(g1, q1);
  return r;
}

DiscreteMomenta RightLegendre(const Vector3& x0, const UnitQuaternion& q0, const Vector3& x1,
                              const UnitQuaternion& q1, const RigidBodyModel& model, double h) {
  const PotentialGradient g1 = model.potential().Gradient(x1, q1);
  return {model.mass() * (x1 - x0) / h - 0.5 * h * g1.x,
          (4.0 / h) * RelativeMomentum(Conjugate(q0) * q1.quaternion(), model.inertia()) -
              0.5 * h * TangentGradient(g1, q1)};
}

DiscreteMomenta LeftLegendre(const Vector3& x0, const UnitQuaternion& q0, const Vector3& x1,
                             const UnitQuaternion& q1, const RigidBodyModel& model, double h) {
  const PotentialGradient g0 = model.potential().Gradient(x0, q0);
  return {model.mass() * (x1 - x0) / h + 0.5 * h * g0.x,
          -(4.0 / h) * RelativeMomentum(Conjugate(q1) * q0.quaternion(), model.inertia()) +
              0.5 * h * TangentGradient(g0, q0)};
}

HamiltonianStepper::HamiltonianStepper(RigidBodyModel model, StepperConfig config)
    : model_(std::move(model)), config_(std::move(config)), solver_(config_.solver) {
  config_.Validate();
}

HamiltonianState HamiltonianStepper::Step(const HamiltonianState& s) {
  const double h = config_.h;
  const double m = model_.mass();
  const Matrix3& j = model_.inertia();
  const PotentialGradient g0 = model_.potential().Gradient(s.x, s.q);

  const Vector3 x1 = s.x + (h / m) * (s.p - 0.5 * h * g0.x);

  // Known part of the attitude equation: w0 - (h/2) F(q0) dV/dq(x0, q0).
  const Vector3 target = s.w - 0.5 * h * TangentGradient(g0, s.q);
  Residual3 residual;
  if (config_.residual_form == ResidualForm::kSimplified) {
    residual = [&](const Vector3& xi) -> Vector3 {
      const UnitQuaternion e = Exp(xi);
      const Vector3 ju = j * e.v();
      return (4.0 / h) * (e.s() * ju + e.v().cross(ju)) - target;
    };
  } else {
    residual = [&](const Vector3& xi) -> Vector3 {
      const UnitQuaternion q1 = s.q * Exp(xi);
      return -(4.0 / h) * RelativeMomentum(Conjugate(q1) * s.q.quaternion(), j) - target;
    };
  }

  const Vector3 guess = warm_start_ ? *warm_start_ : Vector3((h / 4.0) * (model_.inverse_inertia() * s.w));
  const std::optional<Matrix3> saved_jacobian = solver_.jacobian();
  SolveResult solved;
  try {
    solved = solver_.Solve(residual, guess);
    CheckChart(solved.x);
  } catch (...) {
    solver_.set_jacobian(saved_jacobian);
    throw;
  }
  const Vector3& xi = solved.x;
  const UnitQuaternion rel = Exp(xi);
  const UnitQuaternion q1 = s.q * rel;
  const PotentialGradient g1 = model_.potential().Gradient(x1, q1);

  HamiltonianState out;
  out.x = x1;
  out.q = q1;
  out.p = s.p - 0.5 * h * (g0.x + g1.x);
  if (config_.residual_form == ResidualForm::kSimplified) {
    const Vector3 ju = j * rel.v();
    out.w = (4.0 / h) * (rel.s() * ju - rel.v().cross(ju)) - 0.5 * h * TangentGradient(g1, q1);
  } else {
    out.w = (4.0 / h) * RelativeMomentum(Conjugate(s.q) * q1.quaternion(), j) -
            0.5 * h * TangentGradient(g1, q1);
  }

  warm_start_ = xi;
  last_xi_ = xi;
  last_report_ = solved.report;
  return out;
}

StepperCheckpoint HamiltonianStepper::Checkpoint() const { return {warm_start_, solver_.jacobian()}; }

void HamiltonianStepper::Restore(const StepperCheckpoint& checkpoint) {
  warm_start_ = checkpoint.warm_start;
  solver_.set_jacobian(checkpoint.jacobian);
}

HamiltonianState HamiltonianStep(const HamiltonianState& state, const RigidBodyModel& model,
                                 const StepperConfig& config) {
  HamiltonianStepper stepper(model, config);
  return stepper.Step(state);
}

LagrangianStepper::LagrangianStepper(RigidBodyModel model, StepperConfig config)
    : model_(std::move(model)), config_(std::move(config)), solver_(config_.solver) {
  config_.Validate();
}

Configuration LagrangianStepper::Step(const Configuration& previous, const Configuration& current) {
  const double h = config_.h;
  const Matrix3& j = model_.inertia();
  const PotentialGradient g1 = model_.potential().Gradient(current.x, current.q);

  Configuration next;
  next.x = 2.0 * current.x - previous.x - (h * h / model_.mass()) * g1.x;

  const Quaternion back = Conjugate(previous.q) * current.q.quaternion();
  const Vector3 target =
      (4.0 / h) * RelativeMomentum(back, j) - h * TangentGradient(g1, current.q);
  Residual3 residual;
  if (config_.residual_form == ResidualForm::kSimplified) {
    // G(q2* q1) J Im(q2* q1) = -(c J u + u x J u) for (c, u) = exp(xi).
    residual = [&](const Vector3& xi) -> Vector3 {
      const UnitQuaternion e = Exp(xi);
      const Vector3 ju = j * e.v();
      return target - (4.0 / h) * (e.s() * ju + e.v().cross(ju));
    };
  } else {
    residual = [&](const Vector3& xi) -> Vector3 {
      const UnitQuaternion q2 = current.q * Exp(xi);
      return target + (4.0 / h) * RelativeMomentum(Conjugate(q2) * current.q.quaternion(), j);
    };
  }

  // The previous relative rotation is the natural first guess.
  const SolveResult solved = solver_.Solve(residual, Log(UnitQuaternion(back)));
  CheckChart(solved.x);
  next.q = current.q * Exp(solved.x);
  last_xi_ = solved.x;
  last_report_ = solved.report;
  return next;
}

Configuration LagrangianStep(const Configuration& previous, const Configuration& current,
                             const RigidBodyModel& model, const StepperConfig& config) {
  LagrangianStepper stepper(model, config);
  return stepper.Step(previous, current);
}

HamiltonianState LegendreLift(const Vector3& x0, const UnitQuaternion& q0, const Vector3& xdot0,
                              const Vector3& omega0, const InertiaPair& inertia) {
  return {x0, q0, inertia.total_mass * xdot0, 2.0 * (inertia.standard * omega0)};
}

HamiltonianState LegendreLift(const Vector3& x0, const Matrix3& r0, const Vector3& xdot0,
                              const Vector3& omega0, const InertiaPair& inertia) {
  return LegendreLift(x0, LiftRotation(r0), xdot0, omega0, inertia);
}

TangentState ProjectToSe3(const HamiltonianState& state, const InertiaPair& inertia) {
  if (!inertia.IsPositiveDefinite()) {
    throw DomainError("projection requires a positive definite inertia matrix");
  }
  return {RotationMatrix(state.q), state.p / inertia.total_mass,
          0.5 * inertia.standard.llt().solve(state.w)};
}

}  // namespace qlgvi
