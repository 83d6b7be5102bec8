#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "surfpde/geometry.hpp"

namespace surfpde {

struct SizeError : std::length_error {
  using std::length_error::length_error;
};

/// Squared Euclidean distance, evaluated in a fixed order so that the tree
/// and brute-force scans agree bit for bit.
inline double distance2(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

struct Neighbor {
  Index id = 0;
  double dist2 = 0.0;
};

/// Static kd-tree over a subset of node ids. Exact k-nearest queries with
/// ties resolved by ascending id.
class SpatialIndex {
 public:
  /// Indexes every point.
  explicit SpatialIndex(std::span<const Vec3> points);
  /// Indexes only the listed ids (positions still looked up in `points`).
  SpatialIndex(std::span<const Vec3> points, std::vector<Index> ids);

  /// k nearest to q ordered by (distance, id). Returns min(k, size()) hits.
  std::vector<Neighbor> nearest(const Vec3& q, Index k) const;

  Index size() const { return static_cast<Index>(ids_.size()); }
  bool contains(Index id) const;

 private:
  struct Node {
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
    Index begin = 0, end = 0;
    Index left = -1, right = -1;
  };

  Index build(Index begin, Index end);
  void search(Index node, const Vec3& q, std::vector<Neighbor>& heap, Index k) const;

  std::vector<Vec3> pts_;  // reordered copies
  std::vector<Index> ids_;
  std::vector<Node> nodes_;
  std::vector<Index> sorted_ids_;
};

struct Stencil {
  Index base = 0;
  std::vector<Index> neighbors;  // neighbors[0] == base

  Index K() const { return static_cast<Index>(neighbors.size()); }
};

/// K nearest nodes to `base` by Euclidean ambient distance, base first.
/// `base` must be one of the indexed ids.
Stencil knn(const SpatialIndex& index, std::span<const Vec3> points, Index base, Index K);

/// ||omega n n^T d + (I - n n^T) d||: shrinks the co-normal component of d.
inline double weighted_distance(const Vec3& d, const Vec3& n, double omega) {
  const Vec3 v = d - (1.0 - omega) * n.dot(d) * n;
  return v.norm();
}

/// K nearest under weighted_distance among the indexed nodes plus `base`
/// itself (which need not be indexed), base first. Exact: the Euclidean
/// query widens until its radius certifies the anisotropic result.
Stencil restricted_knn(const SpatialIndex& index, std::span<const Vec3> points, Index base, const Vec3& n, Index K,
                       double omega);

}  // namespace surfpde
