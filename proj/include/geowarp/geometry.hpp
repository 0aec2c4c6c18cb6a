#pragma once

// Rigid-body poses, quaternion algebra and the pinhole camera model.
//
// Conventions:
//   * A Pose / RigidTransform maps WORLD coordinates into the CAMERA frame
//     (X_cam = R * X_world + t). Pose::position() is that translation t.
//   * Quaternions are scalar-first (w, x, y, z) and canonicalized to w >= 0.
//   * Pixel coordinates are continuous with pixel centers at integers.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace geowarp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

/// Unit-norm, w >= 0 copy of q. Throws ErrorCode::InvalidQuaternion for a
/// zero (or non-finite) quaternion.
Quat quat_normalize(const Quat& q);

/// Quaternion of the rotation by angle |omega| about omega / |omega|.
Quat quat_exp(const Vec3& omega);

Mat3 skew(const Vec3& v);

class Pose {
 public:
  Pose();
  Pose(const Vec3& position, const Quat& orientation);

  static Pose identity() { return Pose(); }

  const Vec3& position() const noexcept { return position_; }
  const Quat& orientation() const noexcept { return orientation_; }

 private:
  Vec3 position_;
  Quat orientation_;
};

struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }
  static RigidTransform from_matrix(const Mat4& m);

  Vec3 operator*(const Vec3& p) const { return rotation * p + translation; }
  RigidTransform operator*(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }
  Mat4 matrix() const;
};

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws ErrorCode::InvalidInput unless focal lengths and dims are positive.
  void validate() const;
};

RigidTransform pose_to_transform(const Pose& p);
Pose transform_to_pose(const RigidTransform& t);
RigidTransform transform_inverse(const RigidTransform& t);

/// T_curr * T_prev^-1: maps points in the previous camera frame into the
/// current camera frame, both inputs being world-to-camera transforms.
RigidTransform relative_transform(const RigidTransform& prev_world, const RigidTransform& curr_world);

/// Pinhole projection. Throws ErrorCode::BehindCamera when z <= 0.
Vec2 project(const Vec3& point, const Intrinsics& k);

/// Inverse pinhole model at metric depth. Throws ErrorCode::InvalidDepth when
/// depth <= 0 or non-finite.
Vec3 backproject(const Vec2& pixel, double depth, const Intrinsics& k);

/// Geodesic angle between two rotations, in degrees, in [0, 180].
double rotation_angle_deg(const Quat& q1, const Quat& q2);

/// Largest |R^T R - I| entry together with |det R - 1|; used to reject
/// non-rigid pose matrices.
double orthonormality_residual(const Mat3& r);

}  // namespace geowarp
