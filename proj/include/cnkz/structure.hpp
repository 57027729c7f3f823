#pragma once

// Rigid carried structure: contact points (one per robot), the derived
// pairwise distance and triple-angle tables, and box geometry for collision.

#include <string>
#include <vector>

#include "cnkz/geometry.hpp"

namespace cnkz {

enum class StructureKind { Straight, T, I, Custom };

std::string to_string(StructureKind k);
StructureKind structure_kind_from_string(const std::string& s);

struct TripleEntry {
  double cosine = 0.0;            // cos of angle between v(i,j) and v(j,k)
  Vec3 cross = Vec3::Zero();      // unit(v(i,j)) x unit(v(j,k))
  bool collinear = false;         // |cosine| == 1 within tolerance
};

class Structure {
 public:
  Structure() = default;
  Structure(StructureKind kind, std::vector<Vec3> contact_points, std::vector<Obb> boxes,
            double length = 0.0, double spacing = 0.0);

  StructureKind kind() const { return kind_; }
  double length() const { return length_; }
  double spacing() const { return spacing_; }
  int contacts() const { return static_cast<int>(points_.size()); }
  const std::vector<Vec3>& contact_points() const { return points_; }
  // Boxes in the structure frame (the contact-point frame).
  const std::vector<Obb>& boxes() const { return boxes_; }

  double distance(int i, int j) const { return dist_[i * contacts() + j]; }
  const TripleEntry& triple(int i, int j, int k) const {
    const int n = contacts();
    return triples_[(i * n + j) * n + k];
  }

  bool operator==(const Structure& o) const;

 private:
  StructureKind kind_ = StructureKind::Custom;
  std::vector<Vec3> points_;
  std::vector<Obb> boxes_;
  double length_ = 0.0;
  double spacing_ = 0.0;
  std::vector<double> dist_;
  std::vector<TripleEntry> triples_;
};

inline constexpr double kBeamHalfWidth = 0.025;

/// Straight(length) puts contacts every `spacing` along x; T and I use unit
/// bars with contacts at the bar extremities (I adds the center). Contacts are
/// expressed relative to their centroid.
Structure make_structure(StructureKind kind, double length = 1.0, double spacing = 0.5);
Structure make_custom_structure(std::vector<Vec3> points, std::vector<Obb> boxes = {});

}  // namespace cnkz
