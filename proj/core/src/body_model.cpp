#include "qlgvi/body_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "qlgvi/errors.hpp"

namespace qlgvi {
namespace {

constexpr double kComTolerance = 1e-12;
constexpr double kSingularDistance = 1e-12;

}  // namespace

RigidBodyGeometry::RigidBodyGeometry(std::vector<PointMass> masses) : masses_(std::move(masses)) {
  if (masses_.empty()) {
    throw ConfigError("geometry has no point masses");
  }
  Vector3 moment = Vector3::Zero();
  for (const PointMass& pm : masses_) {
    if (!(pm.mass > 0.0) || !std::isfinite(pm.mass)) {
      throw ConfigError("point mass must be positive and finite");
    }
    if (!(pm.radius >= 0.0) || !std::isfinite(pm.radius)) {
      throw ConfigError("ball radius must be nonnegative and finite");
    }
    if (!pm.position.allFinite()) {
      throw ConfigError("ball position must be finite");
    }
    moment += pm.mass * pm.position;
    total_mass_ += pm.mass;
  }
  if (moment.norm() > kComTolerance) {
    std::ostringstream msg;
    msg << "center of mass is not at the body origin (|sum m rho| = " << moment.norm() << ")";
    throw ConfigError(msg.str());
  }
}

RigidBodyGeometry RigidBodyGeometry::ThreeBallPreset() {
  const double c = std::numbers::sqrt3 / 2.0;
  return RigidBodyGeometry({
      {1.0, Vector3(1.0, 0.0, 0.0), 0.1},
      {1.0, Vector3(-0.5, c, 0.0), 0.1},
      {1.0, Vector3(-0.5, -c, 0.0), 0.1},
  });
}

InertiaPair InertiaPair::FromNonstandard(const Matrix3& jd, double mass) {
  return {jd, jd.trace() * Matrix3::Identity() - jd, mass};
}

InertiaPair InertiaPair::FromStandard(const Matrix3& j, double mass) {
  const Matrix3 jd = 0.5 * j.trace() * Matrix3::Identity() - j;
  return {jd, j, mass};
}

bool InertiaPair::IsPositiveDefinite() const {
  if ((standard - standard.transpose()).cwiseAbs().maxCoeff() > 1e-12 * standard.norm()) {
    return false;
  }
  Eigen::LLT<Matrix3> llt(standard);
  return llt.info() == Eigen::Success;
}

InertiaPair BuildInertia(const RigidBodyGeometry& geometry) {
  Matrix3 jd = Matrix3::Zero();
  for (const PointMass& pm : geometry.masses()) {
    jd += pm.mass * pm.position * pm.position.transpose();
    jd += (pm.mass * pm.radius * pm.radius / 5.0) * Matrix3::Identity();
  }
  return InertiaPair::FromNonstandard(jd, geometry.total_mass());
}

CentralGravityPotential::CentralGravityPotential(double mu, RigidBodyGeometry geometry)
    : mu_(mu), geometry_(std::move(geometry)) {
  if (!std::isfinite(mu_)) {
    throw ConfigError("gravitational parameter must be finite");
  }
}

double CentralGravityPotential::Value(const Vector3& x, const Quaternion& q) const {
  const Matrix3 r = AmbientRotationMatrix(q);
  double sum = 0.0;
  for (const PointMass& pm : geometry_.masses()) {
    const double d = (x + r * pm.position).norm();
    if (!(d > kSingularDistance)) {
      throw SingularityError("central gravity: mass element at the attracting center");
    }
    sum += pm.mass / d;
  }
  return -mu_ * sum;
}

// With y_i = x + pi(q) rho_i and dV/dy_i = mu m_i y_i / |y_i|^3, the quaternion
// gradient follows from the partials of the ambient pi(q) rho:
//   d/dq_s  = 4 q_s rho + 2 q_v x rho
//   d/dq_vj = 2 (e_j (q_v . rho) + rho_j q_v) + 2 q_s e_j x rho
PotentialGradient CentralGravityPotential::Gradient(const Vector3& x, const Quaternion& q) const {
  const Matrix3 r = AmbientRotationMatrix(q);
  const double s = q.s();
  const Vector3& v = q.v();
  PotentialGradient g;
  for (const PointMass& pm : geometry_.masses()) {
    const Vector3& rho = pm.position;
    const Vector3 y = x + r * rho;
    const double d = y.norm();
    if (!(d > kSingularDistance)) {
      throw SingularityError("central gravity: mass element at the attracting center");
    }
    const Vector3 dv_dy = (mu_ * pm.mass / (d * d * d)) * y;
    g.x += dv_dy;

    const double v_dot_rho = v.dot(rho);
    g.q[0] += dv_dy.dot(4.0 * s * rho + 2.0 * v.cross(rho));
    for (int j = 0; j < 3; ++j) {
      const Vector3 ej = Vector3::Unit(j);
      const Vector3 dy = 2.0 * (v_dot_rho * ej + rho[j] * v) + 2.0 * s * ej.cross(rho);
      g.q[1 + j] += dv_dy.dot(dy);
    }
  }
  return g;
}

namespace {

// Central differences with per-component step step(component value).
template <typename StepFn>
PotentialGradient CentralDifferences(const PotentialField& potential, const Vector3& x,
                                     const Quaternion& q, StepFn step) {
  PotentialGradient g;
  for (int i = 0; i < 3; ++i) {
    const double delta = step(x[i]);
    const Vector3 dx = delta * Vector3::Unit(i);
    g.x[i] = (potential.Value(x + dx, q) - potential.Value(x - dx, q)) / (2.0 * delta);
  }
  const Vector4 qc = q.ToVector4();
  for (int i = 0; i < 4; ++i) {
    const double delta = step(qc[i]);
    const Vector4 dq = delta * Vector4::Unit(i);
    g.q[i] = (potential.Value(x, Quaternion::FromVector4(qc + dq)) -
              potential.Value(x, Quaternion::FromVector4(qc - dq))) /
             (2.0 * delta);
  }
  return g;
}

}  // namespace

PotentialGradient FiniteDifferenceGradient(const PotentialField& potential, const Vector3& x,
                                           const Quaternion& q, double delta) {
  if (!(delta > 0.0)) {
    throw DomainError("finite-difference step must be positive");
  }
  return CentralDifferences(potential, x, q, [delta](double) { return delta; });
}

PotentialGradient FiniteDifferenceGradient(const PotentialField& potential, const Vector3& x,
                                           const Quaternion& q) {
  return CentralDifferences(potential, x, q,
                            [](double c) { return 1e-5 * std::max(1.0, std::abs(c)); });
}

RigidBodyModel::RigidBodyModel(const InertiaPair& inertia,
                               std::shared_ptr<const PotentialField> potential)
    : inertia_(inertia), potential_(std::move(potential)) {
  if (!(inertia_.total_mass > 0.0)) {
    throw ConfigError("rigid body mass must be positive");
  }
  if (!inertia_.IsPositiveDefinite()) {
    throw ConfigError("standard inertia matrix must be symmetric positive definite");
  }
  if (!potential_) {
    potential_ = std::make_shared<ZeroPotential>();
  }
  inverse_inertia_ = inertia_.standard.inverse();
}

}  // namespace qlgvi
