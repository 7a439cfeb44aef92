#include "qlgvi/quaternion.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "qlgvi/errors.hpp"

namespace qlgvi {
namespace {

// Below this angle exp/log switch to Taylor series for sin(t)/t.
constexpr double kSmallAngle = 1e-4;

constexpr double kSkewTolerance = 1e-9;
constexpr double kRotationTolerance = 1e-9;

}  // namespace

double Quaternion::Norm() const { return std::sqrt(SquaredNorm()); }

Quaternion operator*(const Quaternion& q, const Quaternion& p) {
  return {q.s() * p.s() - q.v().dot(p.v()),
          q.s() * p.v() + p.s() * q.v() + q.v().cross(p.v())};
}

Quaternion Conjugate(const Quaternion& q) { return {q.s(), -q.v()}; }

double Norm(const Quaternion& q) { return q.Norm(); }

Quaternion Inverse(const Quaternion& q) {
  const double n2 = q.SquaredNorm();
  if (!(n2 > 0.0)) {
    throw DomainError("inverse of the zero quaternion");
  }
  return (1.0 / n2) * Conjugate(q);
}

std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
  return os << '[' << q.s() << ", " << q.v()[0] << ", " << q.v()[1] << ", " << q.v()[2] << ']';
}

UnitQuaternion::UnitQuaternion(const Quaternion& q) : q_(q) {
  const double dev = std::abs(q.SquaredNorm() - 1.0);
  if (!(dev <= kUnitTolerance)) {
    std::ostringstream msg;
    msg << "quaternion " << q << " is not unit (| |q|^2 - 1 | = " << dev << ")";
    throw DomainError(msg.str());
  }
}

double UnitQuaternion::NormError() const { return q_.Norm() - 1.0; }

std::ostream& operator<<(std::ostream& os, const UnitQuaternion& q) { return os << q.quaternion(); }

UnitQuaternion Exp(const Vector3& xi) {
  const double angle = xi.norm();
  double sinc;
  if (angle < kSmallAngle) {
    const double a2 = angle * angle;
    sinc = 1.0 - a2 / 6.0 + a2 * a2 / 120.0;
  } else {
    sinc = std::sin(angle) / angle;
  }
  return UnitQuaternion(UnitQuaternion::Unchecked{}, Quaternion(std::cos(angle), sinc * xi));
}

Vector3 Log(const UnitQuaternion& q) {
  const double vnorm = q.v().norm();
  if (q.s() < 0.0 && vnorm < 1e-12) {
    throw DomainError("log of the antipode of the identity is undefined");
  }
  const double angle = std::atan2(vnorm, q.s());
  double inv_sinc;  // angle / sin(angle)
  if (angle < kSmallAngle) {
    const double a2 = angle * angle;
    inv_sinc = 1.0 + a2 / 6.0 + 7.0 * a2 * a2 / 360.0;
  } else {
    inv_sinc = angle / vnorm;
  }
  return inv_sinc * q.v();
}

Matrix3 Hat(const Vector3& x) {
  Matrix3 m;
  m << 0.0, -x[2], x[1],
       x[2], 0.0, -x[0],
       -x[1], x[0], 0.0;
  return m;
}

Vector3 Vee(const Matrix3& m) {
  const double asym = (m + m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kSkewTolerance * std::max(1.0, m.cwiseAbs().maxCoeff()))) {
    throw DomainError("vee of a matrix that is not skew-symmetric");
  }
  return 0.5 * Vector3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Matrix3 AmbientRotationMatrix(const Quaternion& q) {
  const double s = q.s();
  const Vector3& v = q.v();
  return (2.0 * s * s - 1.0) * Matrix3::Identity() + 2.0 * v * v.transpose() + 2.0 * s * Hat(v);
}

Matrix3 RotationMatrix(const UnitQuaternion& q) { return AmbientRotationMatrix(q.quaternion()); }

Vector3 Rotate(const UnitQuaternion& q, const Vector3& v) {
  const double s = q.s();
  const Vector3& u = q.v();
  return (2.0 * s * s - 1.0) * v + 2.0 * u.dot(v) * u + 2.0 * s * u.cross(v);
}

UnitQuaternion LiftRotation(const Matrix3& r) {
  if (!r.allFinite() ||
      (r.transpose() * r - Matrix3::Identity()).norm() > kRotationTolerance ||
      std::abs(r.determinant() - 1.0) > kRotationTolerance) {
    throw DomainError("lift_rotation: input is not a rotation matrix");
  }
  // Shepperd's method: pick the largest of 4 q_s^2, 4 q_i^2 as the pivot.
  const double trace = r.trace();
  const Eigen::Vector4d pivots(1.0 + trace, 1.0 + 2.0 * r(0, 0) - trace,
                               1.0 + 2.0 * r(1, 1) - trace, 1.0 + 2.0 * r(2, 2) - trace);
  Eigen::Index k;
  pivots.maxCoeff(&k);
  double s;
  Vector3 v;
  if (k == 0) {
    s = 0.5 * std::sqrt(pivots[0]);
    const double f = 0.25 / s;
    v = f * Vector3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  } else {
    const int i = static_cast<int>(k) - 1;
    const int j = (i + 1) % 3;
    const int l = (i + 2) % 3;
    v[i] = 0.5 * std::sqrt(pivots[k]);
    const double f = 0.25 / v[i];
    s = f * (r(l, j) - r(j, l));
    v[j] = f * (r(j, i) + r(i, j));
    v[l] = f * (r(l, i) + r(i, l));
  }

  bool flip = s < 0.0;
  if (s == 0.0) {
    for (int i = 0; i < 3; ++i) {
      if (v[i] != 0.0) {
        flip = v[i] < 0.0;
        break;
      }
    }
  }
  if (flip) {
    s = -s;
    v = -v;
  }
  // The input is only orthogonal to kRotationTolerance; project onto S^3.
  const double n = std::sqrt(s * s + v.squaredNorm());
  return UnitQuaternion(Quaternion(s / n, v / n));
}

Matrix34 FMatrix(const Quaternion& q) {
  Matrix34 f;
  f.col(0) = -q.v();
  f.rightCols<3>() = q.s() * Matrix3::Identity() - Hat(q.v());
  return f;
}

Matrix3 GMatrix(const Quaternion& q) { return q.s() * Matrix3::Identity() - Hat(q.v()); }

}  // namespace qlgvi
