#include "dbtsdf/geometry.hpp"

#include "dbtsdf/error.hpp"

#include <cmath>
#include <string>

namespace dbtsdf {

Pose interpolate(const Pose& a, const Pose& b, double t) {
  Pose out;
  out.translation = (1.0 - t) * a.translation + t * b.translation;
  out.rotation = a.rotation.slerp(t, b.rotation).normalized();
  return out;
}

void check_rotation(const Pose& pose) {
  const Eigen::Matrix3d r = pose.rotation.toRotationMatrix();
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = r.determinant();
  if (!(ortho <= 1e-9) || !(std::abs(det - 1.0) <= 1e-9)) {
    fail(ErrorKind::Config, "pose rotation is not a proper rotation (orthonormality error " +
                                std::to_string(ortho) + ", det " + std::to_string(det) + ")");
  }
}

}  // namespace dbtsdf
