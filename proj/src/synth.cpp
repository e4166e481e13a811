#include "echovel/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "echovel/util.hpp"

namespace echovel {

using nlohmann::json;

void SceneSpec::validate() const {
    if (width <= 0 || height <= 0) throw InvalidInput("scene dimensions must be positive");
    if (!geotransform.invertible()) throw InvalidInput("scene geotransform is not invertible");
    timing.validate();
    if (background_level < 0.0) throw InvalidInput("background level must be >= 0");
    if (noise_sigma < 0.0) throw InvalidInput("noise sigma must be >= 0");
    double max_amp = 0.0;
    for (const auto& v : vehicles) {
        if (!(v.amplitude > 0.0 && v.amplitude <= 1.0)) {
            throw InvalidInput("vehicle " + std::to_string(v.id) +
                               ": amplitude must lie in (0,1]");
        }
        if (!(v.sigma_m > 0.0)) {
            throw InvalidInput("vehicle " + std::to_string(v.id) + ": sigma must be > 0");
        }
        max_amp = std::max(max_amp, v.amplitude);
    }
    if (background_level + max_amp > 1.2) {
        throw InvalidInput("background + max amplitude exceeds the 1.2 headroom");
    }
}

namespace {

// splitmix64 finalizer; the noise stream is indexed by (seed, counter) so
// rendering order never affects the output.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

double uniform01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double gaussian_at(std::uint64_t seed, std::uint64_t counter) {
    const double u1 = uniform01(mix64(seed ^ mix64(2 * counter + 1)));
    const double u2 = uniform01(mix64(seed ^ mix64(2 * counter + 2)));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double uniform_at(std::uint64_t seed, std::uint64_t counter) {
    return uniform01(mix64(seed ^ mix64(counter)));
}

struct PixelRange {
    int c0, c1, r0, r1;
    bool empty() const { return c0 > c1 || r0 > r1; }
};

PixelRange world_box_to_pixels(const AffineTransform& t, const Vec2& center, double radius,
                               int width, int height) {
    double cmin = std::numeric_limits<double>::infinity();
    double cmax = -cmin, rmin = cmin, rmax = -cmin;
    for (double dx : {-radius, radius}) {
        for (double dy : {-radius, radius}) {
            const Vec2 p = world_to_pixel(t, center.x + dx, center.y + dy);
            cmin = std::min(cmin, p.x);
            cmax = std::max(cmax, p.x);
            rmin = std::min(rmin, p.y);
            rmax = std::max(rmax, p.y);
        }
    }
    PixelRange out;
    out.c0 = std::max(0, static_cast<int>(std::floor(cmin)) - 1);
    out.c1 = std::min(width - 1, static_cast<int>(std::ceil(cmax)) + 1);
    out.r0 = std::max(0, static_cast<int>(std::floor(rmin)) - 1);
    out.r1 = std::min(height - 1, static_cast<int>(std::ceil(rmax)) + 1);
    return out;
}

}  // namespace

SceneOutput render_scene(const SceneSpec& spec) {
    spec.validate();
    const double dt = band_interval(spec.timing);
    const std::size_t npx = static_cast<std::size_t>(spec.width) * spec.height;

    SceneOutput out;
    out.grid.width = spec.width;
    out.grid.height = spec.height;
    out.grid.geotransform = spec.geotransform;
    out.grid.band_labels = {"blue", "red", "green"};
    out.grid.bands.assign(3, BandPlane{std::vector<double>(npx, spec.background_level)});

    for (int b = 0; b < 3; ++b) {
        auto& values = out.grid.bands[b].values;
        const double t_b = b * dt;
        for (const auto& v : spec.vehicles) {
            const Vec2 center = v.position_t0 + v.velocity_mps * t_b;
            const PixelRange range = world_box_to_pixels(spec.geotransform, center,
                                                         6.0 * v.sigma_m, spec.width,
                                                         spec.height);
            if (range.empty()) continue;
            const double inv_2s2 = 1.0 / (2.0 * v.sigma_m * v.sigma_m);
            for (int row = range.r0; row <= range.r1; ++row) {
                for (int col = range.c0; col <= range.c1; ++col) {
                    const Vec2 p = pixel_center_world(spec.geotransform, col, row);
                    const Vec2 d = p - center;
                    values[static_cast<std::size_t>(row) * spec.width + col] +=
                        v.amplitude * std::exp(-d.dot(d) * inv_2s2);
                }
            }
        }
        if (spec.noise_sigma > 0.0) {
            for (std::size_t i = 0; i < npx; ++i) {
                values[i] += spec.noise_sigma *
                             gaussian_at(spec.seed, static_cast<std::uint64_t>(b) * npx + i);
            }
        }
        for (auto& x : values) {
            x = std::min(1.5, std::max(0.0, x));
        }
    }

    // Ground truth: fractional keypoints on the pixel-index lattice. Echoes
    // with any keypoint outside the grid cannot satisfy dataset invariants,
    // so they only appear in the truth table, flagged as clipped.
    ImageInfo image;
    image.id = 1;
    image.file = "raster.json";
    image.width = spec.width;
    image.height = spec.height;
    image.geotransform = spec.geotransform;
    out.ground_truth.images.push_back(image);

    for (const auto& v : spec.vehicles) {
        std::array<Keypoint, 3> kps{};
        bool inside = true;
        for (int b = 0; b < 3; ++b) {
            const Vec2 center = v.position_t0 + v.velocity_mps * (b * dt);
            const Vec2 px = world_to_pixel(spec.geotransform, center.x, center.y);
            kps[b] = {px.x - 0.5, px.y - 0.5, static_cast<Band>(b)};
            if (kps[b].col < 0.0 || kps[b].col > spec.width - 1 || kps[b].row < 0.0 ||
                kps[b].row > spec.height - 1) {
                inside = false;
            }
        }
        TruthRow row;
        row.vehicle_id = v.id;
        row.speed_mps = v.velocity_mps.norm();
        row.heading_deg = bearing_degrees(v.velocity_mps);
        row.clipped = !inside;
        out.truth.push_back(row);
        if (inside) {
            DatasetEntry entry;
            entry.image_id = image.id;
            entry.echo.id = v.id;
            entry.echo.keypoints = kps;
            entry.echo.bbox = bbox_from_keypoints(kps);
            entry.echo.score = 1.0;
            out.ground_truth.annotations.push_back(std::move(entry));
        }
    }
    std::sort(out.truth.begin(), out.truth.end(),
              [](const TruthRow& a, const TruthRow& b) { return a.vehicle_id < b.vehicle_id; });
    return out;
}

std::string truth_csv(const std::vector<TruthRow>& rows) {
    std::vector<TruthRow> sorted = rows;
    std::sort(sorted.begin(), sorted.end(),
              [](const TruthRow& a, const TruthRow& b) { return a.vehicle_id < b.vehicle_id; });
    std::ostringstream out;
    out << "vehicle_id,speed_mps,heading_deg,clipped\n";
    for (const auto& r : sorted) {
        out << r.vehicle_id << ',' << format_double(r.speed_mps) << ','
            << format_double(r.heading_deg) << ',' << (r.clipped ? 1 : 0) << '\n';
    }
    return out.str();
}

std::vector<RecoveryRow> end_to_end_recover(const SceneOutput& scene,
                                            const CorrectionConfig& cfg,
                                            const BandTiming& timing,
                                            std::uint64_t jitter_seed, double jitter_max_px) {
    cfg.validate();
    if (jitter_max_px < 0.0) jitter_max_px = 0.9 * cfg.max_shift_distance;

    const RasterGrid& grid = scene.grid;
    std::vector<EchoTrajectory> noisy;
    std::uint64_t counter = 0;
    for (const auto& ann : scene.ground_truth.annotations) {
        EchoTrajectory e = ann.echo;
        for (auto& kp : e.keypoints) {
            const double angle = 2.0 * M_PI * uniform_at(jitter_seed, counter++);
            const double radius = jitter_max_px * std::sqrt(uniform_at(jitter_seed, counter++));
            kp.col = std::clamp(kp.col + radius * std::cos(angle), 0.0,
                                static_cast<double>(grid.width - 1));
            kp.row = std::clamp(kp.row + radius * std::sin(angle), 0.0,
                                static_cast<double>(grid.height - 1));
        }
        noisy.push_back(std::move(e));
    }

    const PeakIndex index = build_peak_index(grid, cfg);
    const auto corrected = correct_keypoints(noisy, index, cfg);

    std::vector<RecoveryRow> rows;
    for (const auto& echo : corrected) {
        const VelocityEstimate est = estimate_velocity(echo, grid.geotransform, timing);
        double true_speed = 0.0;
        for (const auto& t : scene.truth) {
            if (t.vehicle_id == echo.id) {
                true_speed = t.speed_mps;
                break;
            }
        }
        rows.push_back({echo.id, true_speed, est.speed_mps,
                        std::abs(est.speed_mps - true_speed)});
    }
    return rows;
}

SceneSpec scene_spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("scene spec parse error: ") + e.what());
    }
    SceneSpec spec;
    try {
        spec.width = j.at("width").get<int>();
        spec.height = j.at("height").get<int>();
        const auto& gt = j.at("geotransform");
        if (!gt.is_array() || gt.size() != 6) {
            throw InvalidInput("scene geotransform must hold 6 numbers");
        }
        spec.geotransform = {gt[0].get<double>(), gt[1].get<double>(), gt[2].get<double>(),
                             gt[3].get<double>(), gt[4].get<double>(), gt[5].get<double>()};
        const auto& timing = j.at("timing");
        spec.timing.v_satellite_mps = timing.at("satellite_velocity_mps").get<double>();
        spec.timing.w_bands_px = timing.value("band_width_px", 660.0);
        spec.timing.d_gsd_m = timing.at("gsd_m").get<double>();
        spec.background_level = j.value("background_level", 0.05);
        spec.noise_sigma = j.value("noise_sigma", 0.0);
        spec.seed = j.value("seed", 0ull);
        for (const auto& v : j.at("vehicles")) {
            SyntheticVehicle veh;
            veh.id = v.at("id").get<std::int64_t>();
            veh.position_t0 = {v.at("x").get<double>(), v.at("y").get<double>()};
            veh.velocity_mps = {v.at("vx").get<double>(), v.at("vy").get<double>()};
            veh.amplitude = v.value("amplitude", 0.5);
            veh.sigma_m = v.value("sigma_m", 1.5 * spec.timing.d_gsd_m);
            spec.vehicles.push_back(veh);
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("scene spec schema error: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string scene_spec_to_json(const SceneSpec& spec) {
    json j;
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["geotransform"] = json::array({spec.geotransform.a, spec.geotransform.b,
                                     spec.geotransform.c, spec.geotransform.d,
                                     spec.geotransform.e, spec.geotransform.f});
    j["timing"] = {{"satellite_velocity_mps", spec.timing.v_satellite_mps},
                   {"band_width_px", spec.timing.w_bands_px},
                   {"gsd_m", spec.timing.d_gsd_m}};
    j["background_level"] = spec.background_level;
    j["noise_sigma"] = spec.noise_sigma;
    j["seed"] = spec.seed;
    json vehicles = json::array();
    for (const auto& v : spec.vehicles) {
        vehicles.push_back({{"id", v.id},
                            {"x", v.position_t0.x},
                            {"y", v.position_t0.y},
                            {"vx", v.velocity_mps.x},
                            {"vy", v.velocity_mps.y},
                            {"amplitude", v.amplitude},
                            {"sigma_m", v.sigma_m}});
    }
    j["vehicles"] = std::move(vehicles);
    return j.dump();
}

}  // namespace echovel
