#include "cnkz/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace cnkz {

Aabb Obb::bounds() const {
  const Vec3 ext = axes.cwiseAbs() * half;
  return {center - ext, center + ext};
}

bool Obb::contains(const Vec3& p, double tol) const {
  const Vec3 local = axes.transpose() * (p - center);
  return (local.cwiseAbs().array() <= half.array() + tol).all();
}

bool overlaps(const Obb& a, const Obb& b) {
  // Gottschalk's 15-axis test, expressed in a's frame.
  const Mat3 r = a.axes.transpose() * b.axes;
  const Vec3 t = a.axes.transpose() * (b.center - a.center);
  constexpr double kEps = 1e-12;
  const Mat3 abs_r = r.cwiseAbs().array() + kEps;

  for (int i = 0; i < 3; ++i) {
    const double ra = a.half[i];
    const double rb = abs_r.row(i).dot(b.half);
    if (std::abs(t[i]) > ra + rb) return false;
  }
  for (int j = 0; j < 3; ++j) {
    const double ra = abs_r.col(j).dot(a.half);
    const double rb = b.half[j];
    if (std::abs(r.col(j).dot(t)) > ra + rb) return false;
  }
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    for (int j = 0; j < 3; ++j) {
      const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      const double ra = a.half[i1] * abs_r(i2, j) + a.half[i2] * abs_r(i1, j);
      const double rb = b.half[j1] * abs_r(i, j2) + b.half[j2] * abs_r(i, j1);
      const double dist = std::abs(t[i2] * r(i1, j) - t[i1] * r(i2, j));
      if (dist > ra + rb) return false;
    }
  }
  return true;
}

double distance_point_aabb(const Vec3& p, const Aabb& box) {
  const Vec3 clamped = p.cwiseMax(box.lo).cwiseMin(box.hi);
  return (p - clamped).norm();
}

double distance_segment_aabb(const Vec3& a, const Vec3& b, const Aabb& box) {
  // Distance to a convex set is convex along the segment: golden-section search.
  auto f = [&](double s) { return distance_point_aabb(a + s * (b - a), box); };
  constexpr double kInvPhi = 0.6180339887498949;
  double lo = 0.0, hi = 1.0;
  double x1 = hi - kInvPhi * (hi - lo), x2 = lo + kInvPhi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    if (f1 <= f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - kInvPhi * (hi - lo); f1 = f(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + kInvPhi * (hi - lo); f2 = f(x2);
    }
  }
  return std::min({f(0.0), f(1.0), f1, f2});
}

RigidFit fit_rigid(std::span<const Vec3> from, std::span<const Vec3> to) {
  RigidFit fit;
  if (from.empty() || from.size() != to.size()) return fit;
  Vec3 cf = Vec3::Zero(), ct = Vec3::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) {
    cf += from[i];
    ct += to[i];
  }
  cf /= double(from.size());
  ct /= double(to.size());
  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < from.size(); ++i) h += (from[i] - cf) * (to[i] - ct).transpose();
  Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  fit.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  fit.translation = ct - fit.rotation * cf;
  double ss = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    ss += (fit.rotation * from[i] + fit.translation - to[i]).squaredNorm();
  }
  fit.rms = std::sqrt(ss / double(from.size()));
  return fit;
}

}  // namespace cnkz
