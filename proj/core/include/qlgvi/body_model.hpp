#pragma once

#include <memory>
#include <vector>

#include "qlgvi/quaternion.hpp"
#include "qlgvi/types.hpp"

namespace qlgvi {

// A uniform ball of the given mass and radius centered at a body-frame point.
struct PointMass {
  double mass = 0.0;
  Vector3 position = Vector3::Zero();
  double radius = 0.0;
};

// Collection of balls whose center of mass is the body-frame origin.
class RigidBodyGeometry {
 public:
  // Throws ConfigError on empty input, nonpositive masses, negative radii, or
  // a first mass moment |sum m_i rho_i| above 1e-12.
  explicit RigidBodyGeometry(std::vector<PointMass> masses);

  // Three unit balls of radius 0.1 at the vertices of an equilateral triangle
  // of circumradius 1 in the body xy-plane.
  static RigidBodyGeometry ThreeBallPreset();

  const std::vector<PointMass>& masses() const { return masses_; }
  double total_mass() const { return total_mass_; }

 private:
  std::vector<PointMass> masses_;
  double total_mass_ = 0.0;
};

// Nonstandard inertia J_d = sum rho rho^T dm and standard inertia
// J = tr[J_d] I - J_d, together with the total mass.
struct InertiaPair {
  Matrix3 nonstandard = Matrix3::Zero();
  Matrix3 standard = Matrix3::Zero();
  double total_mass = 0.0;

  static InertiaPair FromNonstandard(const Matrix3& jd, double mass);
  // Inverts the trace relation: J_d = tr[J]/2 I - J.
  static InertiaPair FromStandard(const Matrix3& j, double mass);

  bool IsPositiveDefinite() const;
};

// J_d = sum_i [m_i rho_i rho_i^T + (m_i a_i^2 / 5) I].
InertiaPair BuildInertia(const RigidBodyGeometry& geometry);

struct PotentialGradient {
  Vector3 x = Vector3::Zero();
  Vector4 q = Vector4::Zero();  // ambient R^4 gradient, scalar component first
};

// Potential energy V(x, q) on R^3 x H. Only the component of the quaternion
// gradient tangent to S^3 enters the dynamics (through F(q) dV/dq).
class PotentialField {
 public:
  virtual ~PotentialField() = default;

  virtual double Value(const Vector3& x, const Quaternion& q) const = 0;
  virtual Vector3 GradX(const Vector3& x, const Quaternion& q) const { return Gradient(x, q).x; }
  virtual Vector4 GradQ(const Vector3& x, const Quaternion& q) const { return Gradient(x, q).q; }
  virtual PotentialGradient Gradient(const Vector3& x, const Quaternion& q) const = 0;
};

class ZeroPotential final : public PotentialField {
 public:
  double Value(const Vector3&, const Quaternion&) const override { return 0.0; }
  PotentialGradient Gradient(const Vector3&, const Quaternion&) const override { return {}; }
};

// V(x, q) = -mu sum_i m_i / |x + pi(q) rho_i|, each ball lumped at its center.
class CentralGravityPotential final : public PotentialField {
 public:
  CentralGravityPotential(double mu, RigidBodyGeometry geometry);

  double mu() const { return mu_; }
  const RigidBodyGeometry& geometry() const { return geometry_; }

  // Throws SingularityError if a ball center sits at the origin.
  double Value(const Vector3& x, const Quaternion& q) const override;
  PotentialGradient Gradient(const Vector3& x, const Quaternion& q) const override;

 private:
  double mu_;
  RigidBodyGeometry geometry_;
};

// Central differences in the 3 position and 4 ambient quaternion components,
// each with step delta.
PotentialGradient FiniteDifferenceGradient(const PotentialField& potential, const Vector3& x,
                                           const Quaternion& q, double delta);
// Same, with per-component step 1e-5 * max(1, |component|).
PotentialGradient FiniteDifferenceGradient(const PotentialField& potential, const Vector3& x,
                                           const Quaternion& q);

// Mass, inertia and potential of one rigid body; immutable once built.
class RigidBodyModel {
 public:
  // Throws ConfigError unless the mass is positive and J is positive definite.
  RigidBodyModel(const InertiaPair& inertia, std::shared_ptr<const PotentialField> potential);

  double mass() const { return inertia_.total_mass; }
  const InertiaPair& inertia_pair() const { return inertia_; }
  const Matrix3& inertia() const { return inertia_.standard; }
  const Matrix3& inverse_inertia() const { return inverse_inertia_; }
  const PotentialField& potential() const { return *potential_; }
  const std::shared_ptr<const PotentialField>& potential_ptr() const { return potential_; }

 private:
  InertiaPair inertia_;
  Matrix3 inverse_inertia_;
  std::shared_ptr<const PotentialField> potential_;
};

}  // namespace qlgvi
