#include "geowarp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geowarp/error.hpp"

namespace geowarp {

Quat quat_normalize(const Quat& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::InvalidQuaternion, "quaternion has zero or non-finite norm");
  }
  Quat out(q.w() / n, q.x() / n, q.y() / n, q.z() / n);
  if (out.w() < 0.0) out.coeffs() *= -1.0;
  return out;
}

Quat quat_exp(const Vec3& omega) {
  const double theta = omega.norm();
  if (theta < 1e-12) {
    // second-order series keeps the map smooth through zero
    return quat_normalize(Quat(1.0 - theta * theta / 8.0, 0.5 * omega.x(), 0.5 * omega.y(), 0.5 * omega.z()));
  }
  const double s = std::sin(0.5 * theta) / theta;
  return Quat(std::cos(0.5 * theta), s * omega.x(), s * omega.y(), s * omega.z());
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Pose::Pose() : position_(Vec3::Zero()), orientation_(Quat::Identity()) {}

Pose::Pose(const Vec3& position, const Quat& orientation)
    : position_(position), orientation_(quat_normalize(orientation)) {}

RigidTransform RigidTransform::from_matrix(const Mat4& m) {
  return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
}

Mat4 RigidTransform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidInput, "intrinsics require fx, fy > 0 and positive image dimensions");
  }
}

RigidTransform pose_to_transform(const Pose& p) {
  return {p.orientation().toRotationMatrix(), p.position()};
}

Pose transform_to_pose(const RigidTransform& t) {
  return Pose(t.translation, Quat(t.rotation));
}

RigidTransform transform_inverse(const RigidTransform& t) {
  const Mat3 rt = t.rotation.transpose();
  return {rt, -rt * t.translation};
}

RigidTransform relative_transform(const RigidTransform& prev_world, const RigidTransform& curr_world) {
  return curr_world * transform_inverse(prev_world);
}

Vec2 project(const Vec3& point, const Intrinsics& k) {
  if (!(point.z() > 0.0)) {
    throw Error(ErrorCode::BehindCamera, "point is behind the camera");
  }
  return {k.fx * point.x() / point.z() + k.cx, k.fy * point.y() / point.z() + k.cy};
}

Vec3 backproject(const Vec2& pixel, double depth, const Intrinsics& k) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw Error(ErrorCode::InvalidDepth, "depth must be positive and finite");
  }
  return {(pixel.x() - k.cx) / k.fx * depth, (pixel.y() - k.cy) / k.fy * depth, depth};
}

double rotation_angle_deg(const Quat& q1, const Quat& q2) {
  const double dot = std::abs(q1.coeffs().dot(q2.coeffs()));
  return 2.0 * std::acos(std::min(1.0, dot)) * 180.0 / std::numbers::pi;
}

double orthonormality_residual(const Mat3& r) {
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(r.determinant() - 1.0));
}

}  // namespace geowarp
