#include "echovel/kdtree.hpp"

#include <algorithm>
#include <limits>

namespace echovel {

namespace {

inline double sq(double v) { return v * v; }

// Candidate ordering: smaller squared distance wins, equal distances fall
// back to (row, col) order so results do not depend on tree layout.
inline bool better(double d2, const PixelCoord& p, const NearestHit& best) {
    if (d2 != best.dist2) return d2 < best.dist2;
    return p < best.point;
}

}  // namespace

KdTree2::KdTree2(std::vector<PixelCoord> points) : points_(std::move(points)) {
    if (points_.empty()) return;
    nodes_.reserve(points_.size());
    root_ = build(0, static_cast<int>(points_.size()), 0);
}

int KdTree2::build(int begin, int end, int depth) {
    if (begin >= end) return -1;
    const int axis = depth % 2;
    const int mid = begin + (end - begin) / 2;
    auto key = [axis](const PixelCoord& p) { return axis == 0 ? p.col : p.row; };
    std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                     [&](const PixelCoord& a, const PixelCoord& b) { return key(a) < key(b); });
    Node node;
    node.point = points_[mid];
    node.axis = axis;
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    nodes_[index].left = build(begin, mid, depth + 1);
    nodes_[index].right = build(mid + 1, end, depth + 1);
    return index;
}

std::optional<NearestHit> KdTree2::nearest(double col, double row) const {
    if (root_ < 0) return std::nullopt;
    NearestHit best;
    best.dist2 = std::numeric_limits<double>::infinity();
    best.point = {std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
    search(root_, col, row, best);
    return best;
}

void KdTree2::search(int index, double col, double row, NearestHit& best) const {
    if (index < 0) return;
    const Node& node = nodes_[index];
    const double d2 = sq(col - node.point.col) + sq(row - node.point.row);
    if (better(d2, node.point, best)) {
        best.dist2 = d2;
        best.point = node.point;
    }
    const double q = node.axis == 0 ? col : row;
    const double split = node.axis == 0 ? node.point.col : node.point.row;
    const int near = q < split ? node.left : node.right;
    const int far = q < split ? node.right : node.left;
    search(near, col, row, best);
    // Descend the far side unless it provably holds no candidate at least as
    // close as the current best (equal distances must still be visited so
    // the tie rule sees every contender).
    if (sq(q - split) <= best.dist2) {
        search(far, col, row, best);
    }
}

}  // namespace echovel
