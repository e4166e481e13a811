#include "doctest.h"

#include <cmath>

#include "echovel/geojson.hpp"
#include "echovel/validation.hpp"
#include "oracles.hpp"

using namespace echovel;

namespace {

const DroneCameraSpec kMavicSpec{4.4, 6.4, 4.8, 8000, 6000, 30.0};

DroneTrack two_point_track(double cx0, double cy0, double cx1, double cy1, double altitude,
                           std::int64_t frames = 30) {
    DroneTrack t;
    t.track_id = 1;
    t.observations = {{0, cx0, cy0, altitude}, {frames, cx1, cy1, altitude}};
    return t;
}

}  // namespace

TEST_CASE("drone_gsd matches the DJI M3T camera constants") {
    const Gsd gsd = drone_gsd(kMavicSpec, 100.0);
    CHECK(gsd.w == doctest::Approx(100.0 * 6.4 / (4.4 * 8000)).epsilon(1e-12));
    CHECK(gsd.w == doctest::Approx(0.018182).epsilon(1e-4));
    CHECK(gsd.h == doctest::Approx(0.018182).epsilon(1e-4));

    // Doubling altitude doubles both axes exactly.
    const Gsd twice = drone_gsd(kMavicSpec, 200.0);
    CHECK(twice.w == 2.0 * gsd.w);
    CHECK(twice.h == 2.0 * gsd.h);

    // Matching aspect ratios give a square GSD.
    const DroneCameraSpec square{4.4, 6.0, 6.0, 4000, 4000, 30.0};
    const Gsd sq = drone_gsd(square, 120.0);
    CHECK(sq.w == sq.h);

    CHECK_THROWS_AS(drone_gsd(kMavicSpec, 0.0), InvalidInput);
}

TEST_CASE("drone_distance under both endpoint metrics") {
    // gsd = 0.02 m/px wants altitude A with A*6.4/(4.4*8000) = 0.02.
    const double altitude = 0.02 * 4.4 * 8000 / 6.4;
    const DroneCameraSpec spec{4.4, 6.4, 6.4, 8000, 8000, 30.0};  // square axes

    SUBCASE("axis-aligned motion is metric independent") {
        const DroneTrack t = two_point_track(0, 0, 100, 0, altitude);
        CHECK(drone_distance(t, spec, DroneDistanceMetric::as_printed) ==
              doctest::Approx(2.0).epsilon(1e-12));
        CHECK(drone_distance(t, spec, DroneDistanceMetric::euclidean) ==
              doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("3-4-5 displacement separates the metrics") {
        const DroneTrack t = two_point_track(0, 0, 30, 40, altitude);
        CHECK(drone_distance(t, spec, DroneDistanceMetric::as_printed) ==
              doctest::Approx(1.4).epsilon(1e-12));
        CHECK(drone_distance(t, spec, DroneDistanceMetric::euclidean) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero displacement") {
        const DroneTrack t = two_point_track(55, 66, 55, 66, altitude);
        CHECK(drone_distance(t, spec, DroneDistanceMetric::as_printed) == 0.0);
    }
}

TEST_CASE("drone_velocity adjusts by the frame rate") {
    const double altitude = 0.02 * 4.4 * 8000 / 6.4;
    const DroneCameraSpec spec{4.4, 6.4, 6.4, 8000, 8000, 30.0};
    const DroneTrack t = two_point_track(0, 0, 100, 0, altitude);  // 2 m over 30 frames
    CHECK(drone_velocity(t, spec, DroneDistanceMetric::euclidean) ==
          doctest::Approx(2.0).epsilon(1e-12));

    DroneCameraSpec fast = spec;
    fast.fps = 60.0;
    CHECK(drone_velocity(t, fast, DroneDistanceMetric::euclidean) ==
          doctest::Approx(4.0).epsilon(1e-12));

    // Arithmetic consistency: 36.62 m over one second is 131.832 km/h.
    DroneTrack mean_track = two_point_track(0, 0, 36.62 / 0.02, 0, altitude);
    const double v = drone_velocity(mean_track, spec, DroneDistanceMetric::euclidean);
    CHECK(v == doctest::Approx(36.62).epsilon(1e-9));
    CHECK(v * 3.6 == doctest::Approx(131.832).epsilon(1e-9));
}

TEST_CASE("drone_velocity only depends on the endpoints") {
    const DroneCameraSpec spec = kMavicSpec;
    DroneTrack t = two_point_track(10, 20, 400, 150, 95.0, 60);
    const double base = drone_velocity(t, spec, DroneDistanceMetric::euclidean);
    t.observations.insert(t.observations.begin() + 1,
                          DroneObservation{17, 5000.0, -300.0, 95.0});
    t.observations.insert(t.observations.begin() + 2,
                          DroneObservation{40, 0.0, 0.0, 95.0});
    CHECK(drone_velocity(t, spec, DroneDistanceMetric::euclidean) == base);
}

TEST_CASE("parse_drone_tracks_csv reads and validates") {
    const std::string csv =
        "track_id,frame,cx_px,cy_px,altitude_m\n"
        "1,0,10,20,95\n"
        "2,0,1,1,80\n"
        "1,30,100,20,95\n"
        "2,15,31,41,80\n";
    const auto tracks = parse_drone_tracks_csv(csv);
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[0].observations.size() == 2);
    CHECK(tracks[1].observations[1].frame == 15);

    CHECK_THROWS_AS(parse_drone_tracks_csv("1,0,1,1\n"), InvalidInput);
    CHECK_THROWS_AS(parse_drone_tracks_csv("1,0,1,1,95\n"), InvalidInput);  // single point
}

TEST_CASE("ks_two_sample statistic") {
    SUBCASE("identical samples give D=0, p=1") {
        const std::vector<double> a{3, 1, 4, 1, 5, 9, 2, 6};
        const KsResult r = ks_two_sample(a, a);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("disjoint supports give D=1") {
        const KsResult r = ks_two_sample({1, 2, 3}, {10, 20, 30});
        CHECK(r.statistic == 1.0);
        CHECK(r.p_value < 0.2);
    }
    SUBCASE("interleaved example") {
        const KsResult r = ks_two_sample({1, 2}, {1.5, 2.5});
        CHECK(r.statistic == oracle::ks_brute({1, 2}, {1.5, 2.5}));
        CHECK(r.statistic == 0.5);
    }
    SUBCASE("empty samples are rejected") {
        CHECK_THROWS_AS(ks_two_sample({}, {1.0}), InvalidInput);
    }
}

TEST_CASE("ks statistic equals the brute-force scan on random samples") {
    oracle::Rng rng(141);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> a, b;
        const int na = rng.uniform_int(1, 60), nb = rng.uniform_int(1, 60);
        for (int i = 0; i < na; ++i) {
            a.push_back(trial % 2 ? rng.uniform(0, 10) : rng.uniform_int(0, 12));
        }
        for (int i = 0; i < nb; ++i) {
            b.push_back(trial % 2 ? rng.uniform(0, 10) : rng.uniform_int(0, 12));
        }
        CHECK(ks_two_sample(a, b).statistic == oracle::ks_brute(a, b));
    }
}

TEST_CASE("ks statistic is invariant under common increasing transforms") {
    oracle::Rng rng(151);
    std::vector<double> a, b;
    for (int i = 0; i < 40; ++i) a.push_back(rng.uniform(0, 50));
    for (int i = 0; i < 55; ++i) b.push_back(rng.uniform(10, 60));
    const double base = ks_two_sample(a, b).statistic;
    auto warp = [](std::vector<double> v) {
        for (auto& x : v) x = std::exp(0.05 * x) + 3.0 * x;
        return v;
    };
    CHECK(ks_two_sample(warp(a), warp(b)).statistic == base);
}

TEST_CASE("describe computes moments like the two-pass oracle") {
    SUBCASE("symmetric sample has zero skew") {
        const DescriptiveStats s = describe({-1, 0, 1});
        CHECK(s.mean == 0.0);
        CHECK(s.skewness.value() == doctest::Approx(0.0).epsilon(1e-15));
    }
    SUBCASE("constant sample") {
        const DescriptiveStats s = describe({4, 4, 4, 4});
        CHECK(s.stddev.value() == 0.0);
        CHECK_FALSE(s.skewness.has_value());
        CHECK_FALSE(s.excess_kurtosis.has_value());
    }
    SUBCASE("worked example") {
        const DescriptiveStats s = describe({1, 2, 3, 4, 10});
        CHECK(s.mean == 4.0);
        CHECK(s.stddev.value() == doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));
        // Central moments: m2 = 10, m3 = 36 -> g1 = 36/10^1.5.
        const auto naive = oracle::naive_moments({1, 2, 3, 4, 10});
        CHECK(naive.m2 == 10.0);
        CHECK(naive.m3 == 36.0);
        CHECK(s.skewness.value() ==
              doctest::Approx(36.0 / std::pow(10.0, 1.5)).epsilon(1e-12));
        CHECK(s.skewness.value() == doctest::Approx(1.1384199576606166).epsilon(1e-12));
        CHECK(s.min == 1.0);
        CHECK(s.max == 10.0);
        CHECK(s.n == 5);
    }
    SUBCASE("random samples match the oracle") {
        oracle::Rng rng(161);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> v;
            const int n = rng.uniform_int(4, 200);
            for (int i = 0; i < n; ++i) v.push_back(rng.uniform(-100, 100));
            const DescriptiveStats s = describe(v);
            const auto o = oracle::naive_moments(v);
            CHECK(s.mean == doctest::Approx(o.mean).epsilon(1e-12));
            CHECK(s.skewness.value() ==
                  doctest::Approx(o.m3 / std::pow(o.m2, 1.5)).epsilon(1e-9));
            CHECK(s.excess_kurtosis.value() ==
                  doctest::Approx(o.m4 / (o.m2 * o.m2) - 3.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("skewness flips sign under negation; kurtosis is affine invariant") {
    oracle::Rng rng(171);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v;
        for (int i = 0; i < 50; ++i) v.push_back(rng.uniform(-10, 30));
        const DescriptiveStats s = describe(v);
        std::vector<double> negated = v;
        for (auto& x : negated) x = -x;
        CHECK(describe(negated).skewness.value() ==
              doctest::Approx(-s.skewness.value()).epsilon(1e-9));

        const double a = rng.uniform(0.2, 5.0) * (trial % 2 ? 1.0 : -1.0);
        const double b = rng.uniform(-40, 40);
        std::vector<double> mapped = v;
        for (auto& x : mapped) x = a * x + b;
        CHECK(describe(mapped).excess_kurtosis.value() ==
              doctest::Approx(s.excess_kurtosis.value()).epsilon(1e-9));
    }
}

TEST_CASE("parse_iso8601 handles offsets and local wall time") {
    const TimeStamp utc = parse_iso8601("2024-03-16T09:30:00Z");
    CHECK(utc.second_of_day == 9 * 3600 + 30 * 60);

    const TimeStamp offset = parse_iso8601("2024-03-16T09:30:00+01:00");
    CHECK(offset.second_of_day == 9 * 3600 + 30 * 60);  // wall clock preserved
    CHECK(utc.epoch_s - offset.epoch_s == 3600);  // +01:00 local is an earlier instant

    const TimeStamp frac = parse_iso8601("2024-03-16 10:15:30.250");
    CHECK(frac.second_of_day == 10 * 3600 + 15 * 60 + 30);

    CHECK_THROWS_AS(parse_iso8601("yesterday"), InvalidInput);
    CHECK_THROWS_AS(parse_iso8601("2024-13-01T00:00:00"), InvalidInput);
}

namespace {

LocatedEstimate located(std::int64_t image_id, std::int64_t echo_id, double speed_kmh, double x,
                        double y, const std::string& when) {
    LocatedEstimate e;
    e.image_id = image_id;
    e.estimate.echo_id = echo_id;
    e.estimate.speed_kmh = speed_kmh;
    e.estimate.speed_mps = speed_kmh / 3.6;
    e.red_world = {x, y};
    e.capture = parse_iso8601(when);
    return e;
}

GpsTrack track_with_point(std::int64_t id, double x, double y, const std::string& when,
                          double speed_kmh) {
    GpsTrack t;
    t.track_id = id;
    t.points.push_back({x, y, parse_iso8601(when), speed_kmh});
    return t;
}

}  // namespace

TEST_CASE("match_gps_to_estimates applies the spatial, temporal and window gates") {
    const GpsMatchOptions opts;
    const auto est = located(1, 7, 90.0, 100.0, 200.0, "2023-09-26T09:45:00Z");

    SUBCASE("a point 4 m away and 10 s apart matches") {
        const auto tracks = {track_with_point(3, 104.0, 200.0, "2023-09-26T09:45:10Z", 85.0)};
        const auto matches = match_gps_to_estimates(tracks, {est}, opts);
        REQUIRE(matches.size() == 1);
        CHECK(matches[0].gps_track_id == 3);
        CHECK(matches[0].distance_m == doctest::Approx(4.0));
        CHECK(matches[0].time_delta_s == doctest::Approx(10.0));
    }
    SUBCASE("a point 40 m away does not match") {
        const auto tracks = {track_with_point(3, 140.0, 200.0, "2023-09-26T09:45:10Z", 85.0)};
        CHECK(match_gps_to_estimates(tracks, {est}, opts).empty());
    }
    SUBCASE("nearest in time wins") {
        std::vector<GpsTrack> tracks{
            track_with_point(3, 101.0, 200.0, "2023-09-26T09:45:30Z", 80.0),
            track_with_point(4, 106.0, 200.0, "2023-09-26T09:45:10Z", 95.0)};
        const auto matches = match_gps_to_estimates(tracks, {est}, opts);
        REQUIRE(matches.size() == 1);
        CHECK(matches[0].gps_track_id == 4);
    }
    SUBCASE("records outside the morning window are excluded") {
        const auto noon = located(1, 7, 90.0, 100.0, 200.0, "2023-09-26T12:00:00Z");
        const auto tracks = {track_with_point(3, 100.0, 200.0, "2023-09-26T12:00:05Z", 85.0)};
        CHECK(match_gps_to_estimates(tracks, {noon}, opts).empty());
    }
    SUBCASE("output ignores input ordering") {
        std::vector<GpsTrack> tracks{
            track_with_point(3, 101.0, 200.0, "2023-09-26T09:45:05Z", 80.0),
            track_with_point(4, 99.0, 201.0, "2023-09-26T09:45:20Z", 95.0)};
        const auto est2 = located(1, 9, 120.0, 500.0, 500.0, "2023-09-26T09:40:00Z");
        auto tracks_rev = tracks;
        std::reverse(tracks_rev.begin(), tracks_rev.end());
        const auto m1 = match_gps_to_estimates(tracks, {est, est2}, opts);
        const auto m2 = match_gps_to_estimates(tracks_rev, {est2, est}, opts);
        REQUIRE(m1.size() == m2.size());
        for (std::size_t i = 0; i < m1.size(); ++i) {
            CHECK(m1[i].echo_id == m2[i].echo_id);
            CHECK(m1[i].gps_track_id == m2[i].gps_track_id);
        }
    }
}

TEST_CASE("gps_residuals buckets at the 100 km/h boundary") {
    std::vector<GpsMatch> pairs{
        {1, 1, 10, 90.0, 80.0, 2.0, 5.0},    // +10, low bucket
        {1, 2, 11, 120.0, 130.0, 3.0, 8.0},  // -10, high bucket
        {1, 3, 12, 110.0, 112.13, 1.0, 2.0},
        {1, 4, 13, 150.0, 169.61, 1.0, 2.0},
    };
    const ResidualReport r = gps_residuals(pairs);
    CHECK(r.rows.size() == 4);
    CHECK(r.rows[0].residual_kmh == doctest::Approx(10.0));
    CHECK(r.low.n == 1);
    CHECK(r.high.n == 3);
    CHECK(r.low.mean.value() == doctest::Approx(10.0));
    // High-bucket extremes.
    CHECK(r.high.min.value() == doctest::Approx(-19.61).epsilon(1e-9));
    CHECK(r.high.max.value() == doctest::Approx(-2.13).epsilon(1e-9));
}

TEST_CASE("gps tracks parse from GeoJSON") {
    const char* geojson = R"({
      "type": "FeatureCollection",
      "features": [
        {"type": "Feature",
         "geometry": {"type": "Point", "coordinates": [512100.0, 5710200.0]},
         "properties": {"track_id": 8, "timestamp": "2023-09-26T09:41:00Z",
                        "speed_kmh": 96.5}},
        {"type": "Feature",
         "geometry": {"type": "Point", "coordinates": [512130.0, 5710260.0]},
         "properties": {"track_id": 8, "timestamp": "2023-09-26T09:41:05Z",
                        "speed_kmh": 97.0}}
      ]
    })";
    const auto tracks = gps_tracks_from_geojson(geojson);
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].track_id == 8);
    REQUIRE(tracks[0].points.size() == 2);
    CHECK(tracks[0].points[1].speed_kmh == 97.0);
}

TEST_CASE("centerlines parse from GeoJSON variants") {
    const char* multi = R"({
      "type": "Feature",
      "geometry": {"type": "MultiLineString",
                   "coordinates": [[[0,0],[10,0]],[[5,5],[5,15],[9,20]]]},
      "properties": {}
    })";
    const auto lines = centerlines_from_geojson(multi);
    REQUIRE(lines.size() == 2);
    CHECK(lines[1].size() == 3);
    CHECK(lines[1][2].x == 9.0);

    CHECK_THROWS_AS(centerlines_from_geojson(R"({"type":"Point","coordinates":[0,0]})"),
                    InvalidInput);
}
