#include "lilo/kdtree.hpp"

#include <algorithm>
#include <numeric>
#include <queue>

namespace lilo {

namespace {

constexpr std::uint32_t kLeafSize = 12;

bool closer(const Neighbor& a, const Neighbor& b) {
  return a.squared_distance < b.squared_distance ||
         (a.squared_distance == b.squared_distance && a.index < b.index);
}

}  // namespace

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  index_.resize(points_.size());
  std::iota(index_.begin(), index_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  if (!points_.empty()) build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back({});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  Vec3 lo = points_[index_[begin]];
  Vec3 hi = lo;
  for (std::uint32_t k = begin + 1; k < end; ++k) {
    lo = lo.cwiseMin(points_[index_[k]]);
    hi = hi.cwiseMax(points_[index_[k]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     return points_[a][axis] < points_[b][axis];
                   });
  const double split = points_[index_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.begin = begin;
  node.end = end;
  node.left = left;
  node.right = right;
  return id;
}

std::vector<Neighbor> KdTree::radius_search(const Vec3& query, double radius) const {
  std::vector<Neighbor> out;
  if (nodes_.empty() || !(radius >= 0.0)) return out;
  const double r2 = radius * radius;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.axis < 0) {
      for (std::uint32_t k = node.begin; k < node.end; ++k) {
        const double d2 = (points_[index_[k]] - query).squaredNorm();
        if (d2 <= r2) out.push_back({index_[k], d2});
      }
      continue;
    }
    // Left holds values ≤ split, right values ≥ split.
    const double diff = query[node.axis] - node.split;
    if (diff <= radius) stack.push_back(node.left);
    if (diff >= -radius) stack.push_back(node.right);
  }
  std::sort(out.begin(), out.end(), closer);
  return out;
}

std::vector<Neighbor> KdTree::knn(const Vec3& query, std::size_t k, double max_radius) const {
  std::vector<Neighbor> heap;  // max-heap under `closer`
  if (nodes_.empty() || k == 0) return heap;
  heap.reserve(k + 1);
  const double limit2 = max_radius * max_radius;

  const auto bound = [&]() {
    return heap.size() < k ? limit2 : std::min(limit2, heap.front().squared_distance);
  };

  // Best-first traversal keyed on the squared distance to the split plane.
  using Entry = std::pair<double, std::int32_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  queue.push({0.0, 0});
  while (!queue.empty()) {
    const auto [plane_d2, id] = queue.top();
    queue.pop();
    if (plane_d2 > bound()) break;
    const Node& node = nodes_[id];
    if (node.axis < 0) {
      for (std::uint32_t s = node.begin; s < node.end; ++s) {
        const Neighbor cand{index_[s], (points_[index_[s]] - query).squaredNorm()};
        if (cand.squared_distance > limit2) continue;
        if (heap.size() < k) {
          heap.push_back(cand);
          std::push_heap(heap.begin(), heap.end(), closer);
        } else if (closer(cand, heap.front())) {
          std::pop_heap(heap.begin(), heap.end(), closer);
          heap.back() = cand;
          std::push_heap(heap.begin(), heap.end(), closer);
        }
      }
      continue;
    }
    const double diff = query[node.axis] - node.split;
    const double d2 = std::max(plane_d2, diff * diff);
    if (diff <= 0.0) {
      queue.push({plane_d2, node.left});
      queue.push({d2, node.right});
    } else {
      queue.push({plane_d2, node.right});
      queue.push({d2, node.left});
    }
  }
  std::sort_heap(heap.begin(), heap.end(), closer);
  return heap;
}

}  // namespace lilo
