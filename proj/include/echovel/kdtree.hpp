#pragma once

#include <optional>
#include <vector>

namespace echovel {

struct PixelCoord {
    int col = 0;
    int row = 0;

    bool operator==(const PixelCoord& o) const { return col == o.col && row == o.row; }
    // Lexicographic (row, col) order; used to break equal-distance ties
    // deterministically across platforms.
    bool operator<(const PixelCoord& o) const {
        return row != o.row ? row < o.row : col < o.col;
    }
};

struct NearestHit {
    PixelCoord point;
    double dist2 = 0.0;
};

// Static 2-D k-d tree over integer pixel coordinates. Median-split build,
// exact nearest-neighbor queries. Equal-distance ties resolve to the point
// with the smallest (row, col).
class KdTree2 {
public:
    KdTree2() = default;
    explicit KdTree2(std::vector<PixelCoord> points);

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    // Nearest stored point to (col,row); nullopt when the tree is empty.
    std::optional<NearestHit> nearest(double col, double row) const;

private:
    struct Node {
        PixelCoord point;
        int axis = 0;        // 0 = col, 1 = row
        int left = -1;
        int right = -1;
    };

    int build(int begin, int end, int depth);
    void search(int node, double col, double row, NearestHit& best) const;

    std::vector<PixelCoord> points_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

}  // namespace echovel
