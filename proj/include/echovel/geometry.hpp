#pragma once

#include <cmath>
#include <stdexcept>

namespace echovel {

// Raised when input data violates a documented contract (bad schema, bad
// parameter range). The CLI maps this to exit code 1.
struct InvalidInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a file cannot be read or written. CLI exit code 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
};

// Six-coefficient affine map from pixel (col,row) to world (x,y) metres:
//   x = a + b*col + c*row
//   y = d + e*col + f*row
// Pixel (0,0) maps the outer corner of the top-left pixel; sample points of
// integer pixel indices sit at (col+0.5, row+0.5).
struct AffineTransform {
    double a = 0.0;
    double b = 1.0;
    double c = 0.0;
    double d = 0.0;
    double e = 0.0;
    double f = 1.0;

    double determinant() const { return b * f - c * e; }
    bool invertible() const { return determinant() != 0.0; }
};

inline Vec2 pixel_to_world(const AffineTransform& t, double col, double row) {
    return {t.a + t.b * col + t.c * row, t.d + t.e * col + t.f * row};
}

inline Vec2 world_to_pixel(const AffineTransform& t, double x, double y) {
    const double det = t.determinant();
    if (det == 0.0) {
        throw InvalidInput("affine transform is not invertible");
    }
    const double dx = x - t.a;
    const double dy = y - t.d;
    return {(t.f * dx - t.c * dy) / det, (-t.e * dx + t.b * dy) / det};
}

// World sample point of an integer pixel index (pixel-center convention).
inline Vec2 pixel_center_world(const AffineTransform& t, int col, int row) {
    return pixel_to_world(t, col + 0.5, row + 0.5);
}

// Squared distance from point p to segment [s0,s1]; degenerate segments
// collapse to point distance.
inline double point_segment_dist2(const Vec2& p, const Vec2& s0, const Vec2& s1) {
    const Vec2 d = s1 - s0;
    const double len2 = d.dot(d);
    if (len2 == 0.0) {
        const Vec2 r = p - s0;
        return r.dot(r);
    }
    double u = (p - s0).dot(d) / len2;
    u = std::fmin(1.0, std::fmax(0.0, u));
    const Vec2 proj = s0 + d * u;
    const Vec2 r = p - proj;
    return r.dot(r);
}

}  // namespace echovel
