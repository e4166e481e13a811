#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "echovel/geometry.hpp"
#include "echovel/velocity.hpp"

namespace echovel {

struct DroneCameraSpec {
    double focal_mm = 4.4;
    double sensor_w_mm = 6.4;
    double sensor_h_mm = 4.8;
    int image_w_px = 8000;
    int image_h_px = 6000;
    double fps = 30.0;

    void validate() const;
};

struct DroneObservation {
    std::int64_t frame = 0;
    double cx_px = 0.0;
    double cy_px = 0.0;
    double altitude_m = 0.0;
};

struct DroneTrack {
    std::int64_t track_id = 0;
    std::vector<DroneObservation> observations;  // frames strictly increasing

    void validate() const;
};

struct Gsd {
    double w = 0.0;  // metres per pixel along image width
    double h = 0.0;
};

// Ground sampling distance at the given altitude: A*S/(F*I) per axis.
Gsd drone_gsd(const DroneCameraSpec& spec, double altitude_m);

// Endpoint displacement metric. `as_printed` sums the per-axis absolute
// ground displacements (the formula with one squared term under each root);
// `euclidean` takes the hypotenuse.
enum class DroneDistanceMetric { as_printed, euclidean };

// Ground distance between a track's first and last observations, using the
// GSD at the mean of the endpoint altitudes.
double drone_distance(const DroneTrack& track, const DroneCameraSpec& spec,
                      DroneDistanceMetric metric);

// Ground speed: endpoint distance over the endpoint frame gap, times fps.
double drone_velocity(const DroneTrack& track, const DroneCameraSpec& spec,
                      DroneDistanceMetric metric);

// Drone track CSV: track_id,frame,cx_px,cy_px,altitude_m.
std::vector<DroneTrack> parse_drone_tracks_csv(const std::string& text);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test. The statistic is the supremum gap
// between the empirical CDFs; the p-value uses the asymptotic Kolmogorov
// series with the small-sample size correction.
KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b);

struct DescriptiveStats {
    std::size_t n = 0;
    double mean = 0.0;
    std::optional<double> stddev;            // sample (n-1) denominator
    double min = 0.0;
    double max = 0.0;
    std::optional<double> skewness;          // g1 = m3 / m2^1.5
    std::optional<double> excess_kurtosis;   // g2 = m4 / m2^2 - 3
};

DescriptiveStats describe(const std::vector<double>& sample);

struct ComparisonReport {
    DescriptiveStats sample_a;
    DescriptiveStats sample_b;
    double ks_statistic = 0.0;
    double ks_p_value = 1.0;

    std::string to_json() const;
};

ComparisonReport compare_samples(const std::vector<double>& a, const std::vector<double>& b);

// Wall-clock timestamp split for window filtering (local time as recorded)
// and epoch arithmetic (UTC offset honored when present).
struct TimeStamp {
    std::int64_t epoch_s = 0;
    int second_of_day = 0;  // from the recorded local clock
};

TimeStamp parse_iso8601(const std::string& text);

struct GpsPoint {
    double x = 0.0;  // projected metres, same CRS as the imagery
    double y = 0.0;
    TimeStamp time;
    double speed_kmh = 0.0;
};

struct GpsTrack {
    std::int64_t track_id = 0;
    std::vector<GpsPoint> points;  // timestamps non-decreasing

    void validate() const;
};

// A velocity estimate located in space and time for oracle matching.
struct LocatedEstimate {
    std::int64_t image_id = 0;
    VelocityEstimate estimate;
    Vec2 red_world;   // world point of the red-band keypoint
    TimeStamp capture;
};

struct GpsMatchOptions {
    int window_start_s = 9 * 3600;   // local seconds-of-day, inclusive
    int window_end_s = 11 * 3600;
    double buffer_m = 10.0;
    double time_tolerance_s = 60.0;
};

struct GpsMatch {
    std::int64_t image_id = 0;
    std::int64_t echo_id = 0;
    std::int64_t gps_track_id = 0;
    double predicted_kmh = 0.0;
    double gps_kmh = 0.0;
    double distance_m = 0.0;
    double time_delta_s = 0.0;
};

// Pairs each estimate with the nearest-in-time GPS point that lies within
// the spatial buffer and time tolerance, after filtering GPS points to the
// local-time window. Output is independent of input ordering.
std::vector<GpsMatch> match_gps_to_estimates(const std::vector<GpsTrack>& tracks,
                                             const std::vector<LocatedEstimate>& estimates,
                                             const GpsMatchOptions& options);

struct ResidualBucket {
    std::size_t n = 0;
    std::optional<double> mean;
    std::optional<double> stddev;
    std::optional<double> min;
    std::optional<double> max;
};

struct ResidualRow {
    GpsMatch match;
    double residual_kmh = 0.0;  // predicted - gps
};

struct ResidualReport {
    std::vector<ResidualRow> rows;
    double split_kmh = 100.0;
    ResidualBucket low;   // predicted below the split
    ResidualBucket high;  // predicted at or above the split

    std::string to_json() const;
};

ResidualReport gps_residuals(const std::vector<GpsMatch>& pairs, double split_kmh = 100.0);

}  // namespace echovel
