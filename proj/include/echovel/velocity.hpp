#pragma once

#include <cstdint>
#include <vector>

#include "echovel/echoes.hpp"
#include "echovel/geometry.hpp"

namespace echovel {

// Push-broom timing model: satellite ground-track speed, per-band frame
// width and ground sampling distance determine the inter-band interval.
struct BandTiming {
    double v_satellite_mps = 0.0;  // required input, no physical default
    double w_bands_px = 660.0;
    double d_gsd_m = 0.0;

    void validate() const;
};

// Seconds elapsed between consecutive band captures:
// delta_t = w_bands * d_GSD / v_satellite.
double band_interval(const BandTiming& t);

struct VelocityEstimate {
    std::int64_t echo_id = 0;
    double d_mean_m = 0.0;
    double delta_t_s = 0.0;
    double speed_mps = 0.0;
    double speed_kmh = 0.0;
    double heading_deg = 0.0;  // clockwise from north, [0,360)
    double score = 1.0;
};

// Keypoints live on the pixel-index lattice; their world sample point is the
// corresponding pixel-center position.
Vec2 keypoint_world(const AffineTransform& t, const Keypoint& kp);

// Bearing of a world vector in degrees clockwise from north (+y), in
// [0,360); the zero vector maps to 0 by convention.
double bearing_degrees(const Vec2& v);

// Average of the blue->red and red->green world-metre distances.
double mean_displacement(const EchoTrajectory& e, const AffineTransform& t);

// Inter-band gap model. `uniform` divides the averaged displacement by one
// interval (the default); `double_green_gap` treats red->green as spanning
// two intervals, for sensors whose green band sits one frame further away.
enum class SegmentGaps { uniform, double_green_gap };

VelocityEstimate estimate_velocity(const EchoTrajectory& e, const AffineTransform& t,
                                   const BandTiming& timing,
                                   SegmentGaps gaps = SegmentGaps::uniform);

// Converts a trajectory-length RMSE (pixels) into a ground-speed error:
// the length error is halved into a mean-displacement error, scaled to
// metres, and divided by the band interval.
double rmse_to_velocity_error(double rmse_px, double d_gsd_m, double delta_t_s);

struct VelocityRow {
    std::int64_t image_id = 0;
    VelocityEstimate estimate;
};

// CSV with header image_id,echo_id,d_mean_m,delta_t_s,speed_mps,speed_kmh,
// heading_deg,score; rows sorted by (image_id, echo_id).
std::string velocity_csv(std::vector<VelocityRow> rows);

}  // namespace echovel
