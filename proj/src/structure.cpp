#include "cnkz/structure.hpp"

#include <algorithm>
#include <cmath>

namespace cnkz {

std::string to_string(StructureKind k) {
  switch (k) {
    case StructureKind::Straight: return "straight";
    case StructureKind::T: return "T";
    case StructureKind::I: return "I";
    case StructureKind::Custom: return "custom";
  }
  return "custom";
}

StructureKind structure_kind_from_string(const std::string& s) {
  if (s == "straight") return StructureKind::Straight;
  if (s == "T") return StructureKind::T;
  if (s == "I") return StructureKind::I;
  if (s == "custom") return StructureKind::Custom;
  throw StructuralError("unknown structure kind '" + s + "'");
}

Structure::Structure(StructureKind kind, std::vector<Vec3> contact_points, std::vector<Obb> boxes,
                     double length, double spacing)
    : kind_(kind), points_(std::move(contact_points)), boxes_(std::move(boxes)),
      length_(length), spacing_(spacing) {
  const int n = contacts();
  if (n < 1) throw StructuralError("structure needs at least one contact point");
  dist_.assign(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) dist_[i * n + j] = (points_[i] - points_[j]).norm();
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!(dist_[i * n + j] > 1e-9)) {
        throw StructuralError("structure contact points " + std::to_string(i) + " and " +
                              std::to_string(j) + " coincide");
      }
    }
  }
  triples_.assign(std::size_t(n) * n * n, TripleEntry{});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        if (i == j || j == k || i == k) continue;
        const Vec3 a = (points_[i] - points_[j]).normalized();
        const Vec3 b = (points_[j] - points_[k]).normalized();
        TripleEntry& e = triples_[(i * n + j) * n + k];
        e.cosine = std::clamp(a.dot(b), -1.0, 1.0);
        e.cross = a.cross(b);
        e.collinear = e.cross.norm() < 1e-9;
        if (e.collinear) e.cosine = e.cosine > 0.0 ? 1.0 : -1.0;
      }
    }
  }
}

bool Structure::operator==(const Structure& o) const {
  if (kind_ != o.kind_ || points_.size() != o.points_.size() || boxes_.size() != o.boxes_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i] != o.points_[i]) return false;
  }
  for (std::size_t i = 0; i < boxes_.size(); ++i) {
    if (boxes_[i].center != o.boxes_[i].center || boxes_[i].axes != o.boxes_[i].axes ||
        boxes_[i].half != o.boxes_[i].half) {
      return false;
    }
  }
  return length_ == o.length_ && spacing_ == o.spacing_;
}

namespace {

Obb bar(const Vec3& from, const Vec3& to) {
  // Axis-aligned beam between two points in the structure plane.
  const Vec3 c = 0.5 * (from + to);
  Vec3 half = (0.5 * (to - from)).cwiseAbs();
  for (int i = 0; i < 3; ++i) half[i] = std::max(half[i], kBeamHalfWidth);
  return {c, Mat3::Identity(), half};
}

Structure centered(StructureKind kind, std::vector<Vec3> pts, std::vector<Obb> boxes,
                   double length, double spacing) {
  Vec3 c = Vec3::Zero();
  for (const auto& p : pts) c += p;
  c /= double(pts.size());
  for (auto& p : pts) p -= c;
  for (auto& b : boxes) b.center -= c;
  return Structure(kind, std::move(pts), std::move(boxes), length, spacing);
}

}  // namespace

Structure make_structure(StructureKind kind, double length, double spacing) {
  switch (kind) {
    case StructureKind::Straight: {
      if (!(length > 0.0) || !(spacing > 0.0)) {
        throw StructuralError("straight structure: length and spacing must be positive");
      }
      const double intervals = length / spacing;
      const long count = std::lround(intervals);
      if (std::abs(intervals - double(count)) > 1e-9 || count < 1) {
        throw StructuralError("straight structure: length must be a positive multiple of spacing");
      }
      std::vector<Vec3> pts;
      for (long k = 0; k <= count; ++k) pts.emplace_back(double(k) * spacing, 0.0, 0.0);
      Obb beam = bar(pts.front(), pts.back());
      beam.half.x() += kBeamHalfWidth;
      return centered(kind, std::move(pts), {beam}, length, spacing);
    }
    case StructureKind::T: {
      std::vector<Vec3> pts{{-0.5, 0.0, 0.0}, {0.5, 0.0, 0.0}, {0.0, -1.0, 0.0}};
      std::vector<Obb> boxes{bar({-0.5, 0.0, 0.0}, {0.5, 0.0, 0.0}),
                             bar({0.0, 0.0, 0.0}, {0.0, -1.0, 0.0})};
      return centered(kind, std::move(pts), std::move(boxes), 1.0, 0.0);
    }
    case StructureKind::I: {
      std::vector<Vec3> pts{{-0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}, {0.0, 0.0, 0.0},
                            {-0.5, -0.5, 0.0}, {0.5, -0.5, 0.0}};
      std::vector<Obb> boxes{bar({-0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}),
                             bar({0.0, -0.5, 0.0}, {0.0, 0.5, 0.0}),
                             bar({-0.5, -0.5, 0.0}, {0.5, -0.5, 0.0})};
      return centered(kind, std::move(pts), std::move(boxes), 1.0, 0.0);
    }
    case StructureKind::Custom:
      break;
  }
  throw StructuralError("make_structure: use make_custom_structure for custom contact sets");
}

Structure make_custom_structure(std::vector<Vec3> points, std::vector<Obb> boxes) {
  return Structure(StructureKind::Custom, std::move(points), std::move(boxes));
}

}  // namespace cnkz
