#pragma once

// Quaternion algebra on H, the unit-quaternion group S^3, and its double
// cover of SO(3).
//
// Quaternions are stored and serialized scalar-first: (s, v) <-> [s, v1, v2, v3].
// The Lie algebra of S^3 is identified with R^3 through xi <-> (0, xi); a body
// angular velocity Omega corresponds to xi = Omega / 2.

#include <ostream>

#include "qlgvi/types.hpp"

namespace qlgvi {

// Tolerance on |s^2 + |v|^2 - 1| accepted when constructing a UnitQuaternion.
inline constexpr double kUnitTolerance = 1e-9;

class Quaternion {
 public:
  Quaternion() : s_(0.0), v_(Vector3::Zero()) {}
  Quaternion(double s, const Vector3& v) : s_(s), v_(v) {}
  Quaternion(double s, double v1, double v2, double v3) : s_(s), v_(v1, v2, v3) {}

  static Quaternion Identity() { return {1.0, Vector3::Zero()}; }
  static Quaternion Pure(const Vector3& v) { return {0.0, v}; }
  static Quaternion FromVector4(const Vector4& c) { return {c[0], c.tail<3>()}; }

  double s() const { return s_; }
  const Vector3& v() const { return v_; }

  Vector4 ToVector4() const { return {s_, v_[0], v_[1], v_[2]}; }

  double SquaredNorm() const { return s_ * s_ + v_.squaredNorm(); }
  double Norm() const;

  Quaternion operator-() const { return {-s_, -v_}; }
  friend Quaternion operator+(const Quaternion& a, const Quaternion& b) {
    return {a.s_ + b.s_, a.v_ + b.v_};
  }
  friend Quaternion operator-(const Quaternion& a, const Quaternion& b) {
    return {a.s_ - b.s_, a.v_ - b.v_};
  }
  friend Quaternion operator*(double k, const Quaternion& q) { return {k * q.s_, k * q.v_}; }
  friend bool operator==(const Quaternion& a, const Quaternion& b) {
    return a.s_ == b.s_ && a.v_ == b.v_;
  }

 private:
  double s_;
  Vector3 v_;
};

// Hamilton product (q_s p_s - q_v.p_v, q_s p_v + p_s q_v + q_v x p_v).
Quaternion operator*(const Quaternion& q, const Quaternion& p);

Quaternion Conjugate(const Quaternion& q);
double Norm(const Quaternion& q);
// q* / |q|^2. Throws DomainError for the zero quaternion.
Quaternion Inverse(const Quaternion& q);

std::ostream& operator<<(std::ostream& os, const Quaternion& q);

// An element of S^3. The unit condition is checked at construction against
// kUnitTolerance; products of unit quaternions are never renormalized.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(Quaternion::Identity()) {}
  // Throws DomainError if |q|^2 deviates from 1 by more than kUnitTolerance.
  explicit UnitQuaternion(const Quaternion& q);
  UnitQuaternion(double s, double v1, double v2, double v3)
      : UnitQuaternion(Quaternion(s, v1, v2, v3)) {}

  static UnitQuaternion Identity() { return {}; }

  double s() const { return q_.s(); }
  const Vector3& v() const { return q_.v(); }
  const Quaternion& quaternion() const { return q_; }
  operator const Quaternion&() const { return q_; }  // NOLINT(google-explicit-constructor)
  Vector4 ToVector4() const { return q_.ToVector4(); }

  // Signed deviation |q| - 1.
  double NormError() const;

  UnitQuaternion Conjugate() const { return UnitQuaternion(Unchecked{}, qlgvi::Conjugate(q_)); }
  UnitQuaternion Inverse() const { return Conjugate(); }
  UnitQuaternion operator-() const { return UnitQuaternion(Unchecked{}, -q_); }

  friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
    return UnitQuaternion(Unchecked{}, a.q_ * b.q_);
  }
  friend bool operator==(const UnitQuaternion& a, const UnitQuaternion& b) { return a.q_ == b.q_; }

 private:
  struct Unchecked {};
  UnitQuaternion(Unchecked, const Quaternion& q) : q_(q) {}
  friend UnitQuaternion Exp(const Vector3& xi);

  Quaternion q_;
};

std::ostream& operator<<(std::ostream& os, const UnitQuaternion& q);

// exp(xi) = (cos|xi|, sin|xi| xi/|xi|). Unit to machine precision.
UnitQuaternion Exp(const Vector3& xi);

// Principal logarithm, |xi| in [0, pi). Throws DomainError at the antipode
// of the identity, where the direction is undefined.
Vector3 Log(const UnitQuaternion& q);

// hat(x) y = x cross y.
Matrix3 Hat(const Vector3& x);
// Inverse of Hat. Throws DomainError unless m is skew-symmetric.
Vector3 Vee(const Matrix3& m);

// The double cover pi: S^3 -> SO(3),
//   pi(q) = (2 q_s^2 - 1) I + 2 q_v q_v^T + 2 q_s hat(q_v).
Matrix3 RotationMatrix(const UnitQuaternion& q);

// The same polynomial evaluated on an arbitrary element of H. Used where a
// quaternion leaves S^3 on purpose, e.g. ambient finite differences.
Matrix3 AmbientRotationMatrix(const Quaternion& q);

// Rotates v by pi(q) without forming the matrix.
Vector3 Rotate(const UnitQuaternion& q, const Vector3& v);

// Preimage of a rotation under pi with sign fixed by q_s >= 0, ties broken by
// making the first nonzero vector component positive. Throws DomainError if
// r is not a rotation.
UnitQuaternion LiftRotation(const Matrix3& r);

// F(q) = (-q_v, q_s I - hat(q_v)), characterized by q (0, v) = F(q)^T v.
Matrix34 FMatrix(const Quaternion& q);

// G(q) = q_s I - hat(q_v), characterized by Im(q (0, v)) = G(q)^T v.
Matrix3 GMatrix(const Quaternion& q);

}  // namespace qlgvi
