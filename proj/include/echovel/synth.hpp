#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echovel/correction.hpp"
#include "echovel/echoes.hpp"
#include "echovel/raster.hpp"
#include "echovel/velocity.hpp"

namespace echovel {

struct SyntheticVehicle {
    std::int64_t id = 0;
    Vec2 position_t0;        // world metres at the blue-band capture
    Vec2 velocity_mps;       // world metres/second
    double amplitude = 0.5;  // peak intensity, (0,1]
    double sigma_m = 0.0;    // blob radius, metres
};

struct SceneSpec {
    int width = 0;
    int height = 0;
    AffineTransform geotransform;
    BandTiming timing;
    std::vector<SyntheticVehicle> vehicles;
    double background_level = 0.05;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

SceneSpec scene_spec_from_json(const std::string& text);
std::string scene_spec_to_json(const SceneSpec& spec);

struct TruthRow {
    std::int64_t vehicle_id = 0;
    double speed_mps = 0.0;
    double heading_deg = 0.0;
    bool clipped = false;  // some keypoint fell outside the grid
};

struct SceneOutput {
    RasterGrid grid;            // blue, red, green
    EchoDataset ground_truth;   // fractional keypoints; clipped vehicles omitted
    std::vector<TruthRow> truth;
};

// Renders the three bands at capture times 0, dt, 2*dt, adds background and
// seeded per-pixel Gaussian noise, and clamps to [0, 1.5]. Deterministic for
// a fixed spec including the seed.
SceneOutput render_scene(const SceneSpec& spec);

std::string truth_csv(const std::vector<TruthRow>& rows);

struct RecoveryRow {
    std::int64_t vehicle_id = 0;
    double true_speed_mps = 0.0;
    double estimated_speed_mps = 0.0;
    double abs_error_mps = 0.0;
};

// Perturbs the ground-truth keypoints with uniform jitter (at most
// 0.9 * cfg.max_shift_distance by default), runs the correction and velocity
// stages, and reports per-vehicle speed errors.
std::vector<RecoveryRow> end_to_end_recover(const SceneOutput& scene,
                                            const CorrectionConfig& cfg,
                                            const BandTiming& timing,
                                            std::uint64_t jitter_seed = 1,
                                            double jitter_max_px = -1.0);

}  // namespace echovel
