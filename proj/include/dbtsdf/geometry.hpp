#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <vector>

namespace dbtsdf {

using Vec3 = Eigen::Vector3d;
using PointSet = std::vector<Vec3>;

/// Rigid transform mapping sensor-frame points into the map frame.
struct Pose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Pose inverse() const {
    Pose inv;
    inv.rotation = rotation.conjugate();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }
  Pose operator*(const Pose& rhs) const {
    Pose out;
    out.rotation = rotation * rhs.rotation;
    out.translation = rotation * rhs.translation + translation;
    return out;
  }
};

/// Translation lerp plus rotation slerp; `t` in [0,1].
Pose interpolate(const Pose& a, const Pose& b, double t);

/// Throws a config error unless the rotation is orthonormal with det +1 (1e-9).
void check_rotation(const Pose& pose);

}  // namespace dbtsdf
