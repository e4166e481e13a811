#include "doctest.h"

#include <cmath>

#include "echovel/correction.hpp"
#include "oracles.hpp"

using namespace echovel;

namespace {

BandPlane band_from(std::vector<double> v) { return BandPlane{std::move(v)}; }

RasterGrid random_grid(oracle::Rng& rng, int w, int h, bool quantized) {
    RasterGrid g;
    g.width = w;
    g.height = h;
    g.geotransform = {0, 1, 0, 0, 0, 1};
    g.band_labels = {"blue", "red", "green"};
    for (int b = 0; b < 3; ++b) {
        BandPlane plane;
        for (int i = 0; i < w * h; ++i) {
            double v = rng.uniform();
            if (quantized) v = std::floor(v * 16.0) / 16.0;  // plateaus and ties
            plane.values.push_back(v);
        }
        g.bands.push_back(std::move(plane));
    }
    return g;
}

EchoTrajectory echo_at(std::int64_t id, std::array<std::pair<double, double>, 3> pts) {
    EchoTrajectory e;
    e.id = id;
    for (int b = 0; b < 3; ++b) {
        e.keypoints[b] = {pts[b].first, pts[b].second, static_cast<Band>(b)};
    }
    e.bbox = bbox_from_keypoints(e.keypoints);
    return e;
}

}  // namespace

TEST_CASE("detect_h_maxima finds an isolated peak") {
    std::vector<double> v(25, 0.0);
    v[12] = 1.0;  // center of a 5x5
    const auto peaks = detect_h_maxima(band_from(v), 5, 5, 0.02, 8);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0] == PixelCoord{2, 2});
}

TEST_CASE("detect_h_maxima suppresses peaks below h") {
    // Peaks of height 1.0 and 0.015 over a flat 0 background; h = 0.02.
    std::vector<double> v(25, 0.0);
    v[6] = 1.0;     // (col 1, row 1)
    v[18] = 0.015;  // (col 3, row 3)
    const auto peaks = detect_h_maxima(band_from(v), 5, 5, 0.02, 8);
    const auto brute = oracle::naive_h_maxima(v, 5, 5, 0.02, 8);
    CHECK(peaks == brute);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0] == PixelCoord{1, 1});
}

TEST_CASE("detect_h_maxima of a constant band is empty") {
    std::vector<double> v(36, 0.0);
    CHECK(detect_h_maxima(band_from(v), 6, 6, 0.02, 8).empty());
    CHECK(detect_h_maxima(band_from(std::vector<double>(36, 1.0)), 6, 6, 0.5, 4).empty());
}

TEST_CASE("detect_h_maxima validates h") {
    std::vector<double> v(9, 0.0);
    CHECK_THROWS_AS(detect_h_maxima(band_from(v), 3, 3, 0.0, 8), InvalidInput);
    CHECK_THROWS_AS(detect_h_maxima(band_from(v), 3, 3, 1.0, 8), InvalidInput);
    CHECK_THROWS_AS(detect_h_maxima(band_from(v), 3, 3, -0.5, 8), InvalidInput);
}

TEST_CASE("reconstruction matches the naive fixpoint on random grids") {
    oracle::Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const int w = rng.uniform_int(1, 12), h = rng.uniform_int(1, 12);
        std::vector<double> mask, marker;
        for (int i = 0; i < w * h; ++i) {
            double m = rng.uniform();
            if (trial % 2) m = std::floor(m * 8.0) / 8.0;
            mask.push_back(m);
            marker.push_back(m - rng.uniform(0.0, 0.3));
        }
        const int conn = trial % 3 == 0 ? 4 : 8;
        CHECK(reconstruct_by_dilation(marker, mask, w, h, conn) ==
              oracle::naive_reconstruct(marker, mask, w, h, conn));
    }
}

TEST_CASE("kd-tree nearest equals linear scan, including ties") {
    oracle::Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<PixelCoord> points;
        const int n = rng.uniform_int(1, 60);
        for (int i = 0; i < n; ++i) {
            points.push_back({rng.uniform_int(0, 15), rng.uniform_int(0, 15)});
        }
        const KdTree2 tree(points);
        CHECK(tree.size() == points.size());
        for (int q = 0; q < 100; ++q) {
            // Half-integer query coordinates force exact distance ties.
            const double col = rng.uniform_int(0, 30) / 2.0;
            const double row = rng.uniform_int(0, 30) / 2.0;
            const auto fast = tree.nearest(col, row);
            const auto slow = oracle::linear_nearest(points, col, row);
            REQUIRE(fast.has_value());
            CHECK(fast->point == slow->point);
            CHECK(fast->dist2 == slow->dist2);
        }
    }
}

TEST_CASE("empty peak set reports no neighbor") {
    const KdTree2 tree{std::vector<PixelCoord>{}};
    CHECK(tree.empty());
    CHECK_FALSE(tree.nearest(3.0, 4.0).has_value());
}

TEST_CASE("build_peak_index builds one tree per band") {
    RasterGrid g;
    g.width = 7;
    g.height = 7;
    g.geotransform = {0, 1, 0, 0, 0, 1};
    g.band_labels = {"blue", "red", "green"};
    g.bands.assign(3, BandPlane{std::vector<double>(49, 0.0)});
    g.at(0, 1, 1) = 1.0;
    g.at(0, 5, 5) = 0.8;
    g.at(0, 3, 5) = 0.6;
    g.at(1, 2, 2) = 1.0;
    const CorrectionConfig cfg;
    const PeakIndex index = build_peak_index(g, cfg);
    CHECK(index.tree(Band::blue).size() == 3);
    CHECK(index.tree(Band::red).size() == 1);
    CHECK(index.tree(Band::green).size() == 0);
}

TEST_CASE("correct_keypoints applies the distance rule") {
    RasterGrid g;
    g.width = 16;
    g.height = 16;
    g.geotransform = {0, 1, 0, 0, 0, 1};
    g.band_labels = {"blue", "red", "green"};
    g.bands.assign(3, BandPlane{std::vector<double>(256, 0.0)});
    g.at(0, 10, 11) = 1.0;  // blue peak at col 10, row 11
    g.at(1, 2, 2) = 1.0;
    g.at(2, 8, 8) = 1.0;
    const CorrectionConfig cfg;
    const PeakIndex index = build_peak_index(g, cfg);

    SUBCASE("keypoint within range snaps to the peak") {
        auto out = correct_keypoints({echo_at(1, {{{10.4, 10.6}, {2.0, 2.0}, {8.0, 8.0}}})},
                                     index, cfg);
        CHECK(out[0].kp(Band::blue).col == 10.0);
        CHECK(out[0].kp(Band::blue).row == 11.0);
    }
    SUBCASE("keypoint five pixels from the nearest peak is retained") {
        auto out = correct_keypoints({echo_at(1, {{{10.0, 6.0}, {2.0, 2.0}, {8.0, 8.0}}})},
                                     index, cfg);
        CHECK(out[0].kp(Band::blue).col == 10.0);
        CHECK(out[0].kp(Band::blue).row == 6.0);
    }
    SUBCASE("keypoint already on a peak stays put") {
        auto out = correct_keypoints({echo_at(1, {{{10.0, 11.0}, {2.0, 2.0}, {8.0, 8.0}}})},
                                     index, cfg);
        CHECK(out[0].kp(Band::blue).col == 10.0);
        CHECK(out[0].kp(Band::blue).row == 11.0);
    }
    SUBCASE("distance exactly at the threshold retains the original") {
        auto out = correct_keypoints({echo_at(1, {{{10.0, 13.0}, {2.0, 2.0}, {8.0, 8.0}}})},
                                     index, cfg);
        CHECK(out[0].kp(Band::blue).row == 13.0);
    }
}

TEST_CASE("full correction equals brute force on random grids") {
    oracle::Rng rng(31);
    for (int trial = 0; trial < 25; ++trial) {
        const int w = rng.uniform_int(6, 32), h = rng.uniform_int(6, 32);
        const RasterGrid g = random_grid(rng, w, h, trial % 2 == 0);
        CorrectionConfig cfg;
        cfg.connectivity = trial % 3 == 0 ? 4 : 8;
        std::vector<EchoTrajectory> echoes;
        for (int i = 0; i < 6; ++i) {
            auto coord = [&]() {
                // Mix fractional and exact half-pixel keypoints to exercise
                // threshold and nearest-neighbor ties.
                return trial % 2 ? rng.uniform(0.0, w - 1.0)
                                 : rng.uniform_int(0, 2 * (w - 1)) / 2.0;
            };
            echoes.push_back(echo_at(i + 1, {{{coord(), coord()},
                                              {coord(), coord()},
                                              {coord(), coord()}}}));
        }
        const PeakIndex index = build_peak_index(g, cfg);
        const auto fast = correct_keypoints(echoes, index, cfg);
        const auto brute = oracle::brute_correct(echoes, g, cfg);
        REQUIRE(fast.size() == brute.size());
        for (std::size_t i = 0; i < fast.size(); ++i) {
            for (int b = 0; b < 3; ++b) {
                CHECK(fast[i].keypoints[b].col == brute[i].keypoints[b].col);
                CHECK(fast[i].keypoints[b].row == brute[i].keypoints[b].row);
            }
        }
    }
}

TEST_CASE("correction is idempotent and motion is bounded") {
    oracle::Rng rng(41);
    for (int trial = 0; trial < 15; ++trial) {
        const RasterGrid g = random_grid(rng, 24, 24, trial % 2 == 0);
        const CorrectionConfig cfg;
        std::vector<EchoTrajectory> echoes;
        for (int i = 0; i < 8; ++i) {
            echoes.push_back(echo_at(i + 1, {{{rng.uniform(0, 23), rng.uniform(0, 23)},
                                              {rng.uniform(0, 23), rng.uniform(0, 23)},
                                              {rng.uniform(0, 23), rng.uniform(0, 23)}}}));
        }
        const PeakIndex index = build_peak_index(g, cfg);
        const auto once = correct_keypoints(echoes, index, cfg);
        const auto twice = correct_keypoints(once, index, cfg);
        for (std::size_t i = 0; i < echoes.size(); ++i) {
            for (int b = 0; b < 3; ++b) {
                CHECK(once[i].keypoints[b].col == twice[i].keypoints[b].col);
                CHECK(once[i].keypoints[b].row == twice[i].keypoints[b].row);
                const double dx = once[i].keypoints[b].col - echoes[i].keypoints[b].col;
                const double dy = once[i].keypoints[b].row - echoes[i].keypoints[b].row;
                const double moved = std::hypot(dx, dy);
                CHECK((moved < cfg.max_shift_distance || moved == 0.0));
                CHECK(once[i].score == echoes[i].score);
            }
        }
    }
}

TEST_CASE("perturbing one band never changes another band's corrections") {
    oracle::Rng rng(53);
    RasterGrid g = random_grid(rng, 20, 20, false);
    const CorrectionConfig cfg;
    std::vector<EchoTrajectory> echoes;
    for (int i = 0; i < 6; ++i) {
        echoes.push_back(echo_at(i + 1, {{{rng.uniform(0, 19), rng.uniform(0, 19)},
                                          {rng.uniform(0, 19), rng.uniform(0, 19)},
                                          {rng.uniform(0, 19), rng.uniform(0, 19)}}}));
    }
    const auto base = correct_keypoints(echoes, build_peak_index(g, cfg), cfg);

    // Scramble the green band; blue and red corrections must be unchanged.
    for (auto& v : g.bands[2].values) v = rng.uniform();
    const auto altered = correct_keypoints(echoes, build_peak_index(g, cfg), cfg);
    for (std::size_t i = 0; i < echoes.size(); ++i) {
        for (int b = 0; b < 2; ++b) {
            CHECK(base[i].keypoints[b].col == altered[i].keypoints[b].col);
            CHECK(base[i].keypoints[b].row == altered[i].keypoints[b].row);
        }
    }
}

TEST_CASE("h-maxima are invariant under increasing affine rescaling before normalization") {
    oracle::Rng rng(67);
    for (int trial = 0; trial < 10; ++trial) {
        const int w = 12, h = 12;
        BandPlane raw;
        for (int i = 0; i < w * h; ++i) raw.values.push_back(rng.uniform(0.0, 800.0));
        const double scale = rng.uniform(0.1, 50.0);
        const double offset = rng.uniform(0.0, 500.0);
        BandPlane rescaled;
        for (double v : raw.values) rescaled.values.push_back(scale * v + offset);
        const auto a = detect_h_maxima(normalize_band(raw), w, h, 0.02, 8);
        const auto b = detect_h_maxima(normalize_band(rescaled), w, h, 0.02, 8);
        CHECK(a == b);
    }
}
