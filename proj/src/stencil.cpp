#include "surfpde/stencil.hpp"

#include <algorithm>
#include <numeric>

namespace surfpde {

namespace {
constexpr Index kLeafSize = 12;

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.id < b.id);
}
}  // namespace

SpatialIndex::SpatialIndex(std::span<const Vec3> points) {
  std::vector<Index> ids(points.size());
  std::iota(ids.begin(), ids.end(), Index{0});
  *this = SpatialIndex(points, std::move(ids));
}

SpatialIndex::SpatialIndex(std::span<const Vec3> points, std::vector<Index> ids) : ids_(std::move(ids)) {
  pts_.reserve(ids_.size());
  for (Index id : ids_) {
    if (id < 0 || id >= static_cast<Index>(points.size())) throw SizeError("SpatialIndex: id out of range");
    pts_.push_back(points[static_cast<std::size_t>(id)]);
  }
  nodes_.reserve(2 * ids_.size() / kLeafSize + 2);
  if (!ids_.empty()) build(0, static_cast<Index>(ids_.size()));
  sorted_ids_ = ids_;
  std::sort(sorted_ids_.begin(), sorted_ids_.end());
}

bool SpatialIndex::contains(Index id) const { return std::binary_search(sorted_ids_.begin(), sorted_ids_.end(), id); }

Index SpatialIndex::build(Index begin, Index end) {
  const Index self = static_cast<Index>(nodes_.size());
  nodes_.push_back({});
  nodes_[self].begin = begin;
  nodes_[self].end = end;
  if (end - begin <= kLeafSize) return self;

  Vec3 lo = pts_[begin], hi = pts_[begin];
  for (Index i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(pts_[i]);
    hi = hi.cwiseMax(pts_[i]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const Index mid = begin + (end - begin) / 2;

  std::vector<Index> order(static_cast<std::size_t>(end - begin));
  std::iota(order.begin(), order.end(), begin);
  std::nth_element(order.begin(), order.begin() + (mid - begin), order.end(),
                   [&](Index a, Index b) { return pts_[a][axis] < pts_[b][axis]; });
  std::vector<Vec3> p2;
  std::vector<Index> id2;
  p2.reserve(order.size());
  id2.reserve(order.size());
  for (Index o : order) {
    p2.push_back(pts_[o]);
    id2.push_back(ids_[o]);
  }
  std::copy(p2.begin(), p2.end(), pts_.begin() + begin);
  std::copy(id2.begin(), id2.end(), ids_.begin() + begin);

  const double split = pts_[mid][axis];
  const Index left = build(begin, mid);
  const Index right = build(mid, end);
  nodes_[self].axis = axis;
  nodes_[self].split = split;
  nodes_[self].left = left;
  nodes_[self].right = right;
  return self;
}

void SpatialIndex::search(Index node, const Vec3& q, std::vector<Neighbor>& heap, Index k) const {
  const Node& nd = nodes_[node];
  if (nd.axis < 0) {
    for (Index i = nd.begin; i < nd.end; ++i) {
      const Neighbor cand{ids_[i], distance2(q, pts_[i])};
      if (static_cast<Index>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), closer);
      } else if (closer(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), closer);
      }
    }
    return;
  }
  const double diff = q[nd.axis] - nd.split;
  const Index first = diff < 0 ? nd.left : nd.right;
  const Index second = diff < 0 ? nd.right : nd.left;
  search(first, q, heap, k);
  // points on the far side sit at least |diff| away along the split axis
  if (static_cast<Index>(heap.size()) < k || diff * diff <= heap.front().dist2) search(second, q, heap, k);
}

std::vector<Neighbor> SpatialIndex::nearest(const Vec3& q, Index k) const {
  k = std::min(k, size());
  std::vector<Neighbor> heap;
  if (k <= 0) return heap;
  heap.reserve(static_cast<std::size_t>(k));
  search(0, q, heap, k);
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

Stencil knn(const SpatialIndex& index, std::span<const Vec3> points, Index base, Index K) {
  if (K <= 0 || K > index.size())
    throw SizeError("knn: K=" + std::to_string(K) + " exceeds indexed count " + std::to_string(index.size()));
  if (!index.contains(base)) throw SizeError("knn: base node is not indexed");
  const auto hits = index.nearest(points[static_cast<std::size_t>(base)], K);
  Stencil s;
  s.base = base;
  s.neighbors.reserve(static_cast<std::size_t>(K));
  s.neighbors.push_back(base);
  for (const auto& h : hits)
    if (h.id != base) s.neighbors.push_back(h.id);
  s.neighbors.resize(static_cast<std::size_t>(K));
  return s;
}

Stencil restricted_knn(const SpatialIndex& index, std::span<const Vec3> points, Index base, const Vec3& n, Index K,
                       double omega) {
  const bool base_indexed = index.contains(base);
  const Index available = index.size() + (base_indexed ? 0 : 1);
  if (K <= 0 || K > available)
    throw SizeError("restricted_knn: K=" + std::to_string(K) + " exceeds candidate count " + std::to_string(available));
  const Vec3& xb = points[static_cast<std::size_t>(base)];

  struct Cand {
    Index id;
    double wd;
  };
  auto by_weighted = [](const Cand& a, const Cand& b) { return a.wd < b.wd || (a.wd == b.wd && a.id < b.id); };

  Index request = std::min(index.size(), K + K / 2);
  std::vector<Cand> cands;
  for (;;) {
    const auto hits = index.nearest(xb, request);
    cands.clear();
    cands.push_back({base, 0.0});
    for (const auto& h : hits)
      if (h.id != base) cands.push_back({h.id, weighted_distance(points[static_cast<std::size_t>(h.id)] - xb, n, omega)});
    std::sort(cands.begin(), cands.end(), by_weighted);
    if (request >= index.size()) break;
    // unseen candidates have Euclidean distance >= r, so weighted >= omega*r
    const double r = std::sqrt(hits.back().dist2);
    if (static_cast<Index>(cands.size()) >= K && cands[static_cast<std::size_t>(K - 1)].wd < omega * r * (1.0 - 1e-12))
      break;
    request = std::min(index.size(), 2 * request);
  }
  Stencil s;
  s.base = base;
  s.neighbors.reserve(static_cast<std::size_t>(K));
  for (Index k = 0; k < K; ++k) s.neighbors.push_back(cands[static_cast<std::size_t>(k)].id);
  return s;
}

}  // namespace surfpde
