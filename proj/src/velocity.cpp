#include "echovel/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "echovel/util.hpp"

namespace echovel {

void BandTiming::validate() const {
    if (!(v_satellite_mps > 0.0)) {
        throw InvalidInput("satellite velocity must be > 0 (it has no default)");
    }
    if (!(w_bands_px > 0.0)) {
        throw InvalidInput("band width must be > 0 pixels");
    }
    if (!(d_gsd_m > 0.0)) {
        throw InvalidInput("ground sampling distance must be > 0");
    }
}

double band_interval(const BandTiming& t) {
    t.validate();
    return t.w_bands_px * t.d_gsd_m / t.v_satellite_mps;
}

Vec2 keypoint_world(const AffineTransform& t, const Keypoint& kp) {
    return pixel_to_world(t, kp.col + 0.5, kp.row + 0.5);
}

double mean_displacement(const EchoTrajectory& e, const AffineTransform& t) {
    const Vec2 b = keypoint_world(t, e.kp(Band::blue));
    const Vec2 r = keypoint_world(t, e.kp(Band::red));
    const Vec2 g = keypoint_world(t, e.kp(Band::green));
    return ((b - r).norm() + (r - g).norm()) / 2.0;
}

double bearing_degrees(const Vec2& v) {
    if (v.x == 0.0 && v.y == 0.0) return 0.0;
    double deg = std::atan2(v.x, v.y) * 180.0 / M_PI;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg = 0.0;
    return deg;
}

VelocityEstimate estimate_velocity(const EchoTrajectory& e, const AffineTransform& t,
                                   const BandTiming& timing, SegmentGaps gaps) {
    const double dt = band_interval(timing);
    const Vec2 b = keypoint_world(t, e.kp(Band::blue));
    const Vec2 r = keypoint_world(t, e.kp(Band::red));
    const Vec2 g = keypoint_world(t, e.kp(Band::green));
    const double d_br = (b - r).norm();
    const double d_rg = (r - g).norm();

    VelocityEstimate out;
    out.echo_id = e.id;
    out.d_mean_m = (d_br + d_rg) / 2.0;
    out.delta_t_s = dt;
    if (gaps == SegmentGaps::uniform) {
        out.speed_mps = out.d_mean_m / dt;
    } else {
        out.speed_mps = (d_br / dt + d_rg / (2.0 * dt)) / 2.0;
    }
    out.speed_kmh = 3.6 * out.speed_mps;
    out.heading_deg = bearing_degrees(g - b);
    out.score = e.score;
    return out;
}

double rmse_to_velocity_error(double rmse_px, double d_gsd_m, double delta_t_s) {
    if (rmse_px < 0.0 || !(d_gsd_m > 0.0) || !(delta_t_s > 0.0)) {
        throw InvalidInput("rmse_to_velocity_error needs non-negative rmse and positive gsd/dt");
    }
    return (rmse_px * d_gsd_m / 2.0) / delta_t_s;
}

std::string velocity_csv(std::vector<VelocityRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const VelocityRow& a, const VelocityRow& b) {
        if (a.image_id != b.image_id) return a.image_id < b.image_id;
        return a.estimate.echo_id < b.estimate.echo_id;
    });
    std::ostringstream out;
    out << "image_id,echo_id,d_mean_m,delta_t_s,speed_mps,speed_kmh,heading_deg,score\n";
    for (const auto& row : rows) {
        const VelocityEstimate& e = row.estimate;
        out << row.image_id << ',' << e.echo_id << ',' << format_double(e.d_mean_m) << ','
            << format_double(e.delta_t_s) << ',' << format_double(e.speed_mps) << ','
            << format_double(e.speed_kmh) << ',' << format_double(e.heading_deg) << ','
            << format_double(e.score) << '\n';
    }
    return out.str();
}

}  // namespace echovel
