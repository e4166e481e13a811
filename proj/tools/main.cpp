#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "echovel/correction.hpp"
#include "echovel/echoes.hpp"
#include "echovel/geojson.hpp"
#include "echovel/metrics.hpp"
#include "echovel/plots.hpp"
#include "echovel/raster.hpp"
#include "echovel/synth.hpp"
#include "echovel/util.hpp"
#include "echovel/validation.hpp"
#include "echovel/velocity.hpp"

namespace {

using namespace echovel;

RasterFormat format_for(const std::string& path) {
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".tif" || ext == ".tiff") return RasterFormat::geotiff;
    return RasterFormat::json_grid;
}

// Velocity rows plus the context the GPS oracle needs.
struct SpeedResult {
    std::vector<VelocityRow> rows;
    std::vector<LocatedEstimate> located;
};

SpeedResult compute_speeds(const EchoDataset& detections, const BandTiming& timing,
                           const std::optional<RasterGrid>& raster_override,
                           SegmentGaps gaps) {
    SpeedResult out;
    for (const auto& ann : detections.annotations) {
        const ImageInfo* image = detections.find_image(ann.image_id);
        const AffineTransform& t =
            raster_override ? raster_override->geotransform : image->geotransform;
        if (!t.invertible()) {
            throw InvalidInput("image " + std::to_string(ann.image_id) +
                               " has a non-invertible geotransform and no --raster was given");
        }
        const VelocityEstimate est = estimate_velocity(ann.echo, t, timing, gaps);
        out.rows.push_back({ann.image_id, est});
        LocatedEstimate loc;
        loc.image_id = ann.image_id;
        loc.estimate = est;
        loc.red_world = keypoint_world(t, ann.echo.kp(Band::red));
        if (image->timestamp) {
            loc.capture = parse_iso8601(*image->timestamp);
        } else {
            loc.capture = {};
        }
        out.located.push_back(std::move(loc));
    }
    return out;
}

std::vector<double> speeds_from_file(const std::string& path) {
    const std::string text = read_text_file(path);
    std::vector<double> out;
    std::istringstream in(text);
    std::string line;
    int kmh_column = -1;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) fields.push_back(f);
        if (first) {
            first = false;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (fields[i] == "speed_kmh") kmh_column = static_cast<int>(i);
            }
            if (kmh_column >= 0) continue;  // header consumed
        }
        try {
            if (kmh_column >= 0) {
                if (static_cast<int>(fields.size()) <= kmh_column) {
                    throw InvalidInput("short row in " + path);
                }
                out.push_back(std::stod(fields[kmh_column]));
            } else {
                out.push_back(std::stod(fields[0]));
            }
        } catch (const std::invalid_argument&) {
            throw InvalidInput("cannot parse speed value in " + path + ": " + line);
        }
    }
    if (out.empty()) throw InvalidInput("no speed values in " + path);
    return out;
}

int run_simulate(const std::string& spec_path, const std::string& out_dir) {
    const SceneSpec spec = scene_spec_from_json(read_text_file(spec_path));
    const SceneOutput scene = render_scene(spec);
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    write_text_file_atomic((dir / "raster.json").string(), raster_to_json(scene.grid));
    write_text_file_atomic((dir / "dataset.json").string(),
                           dataset_to_json(scene.ground_truth));
    write_text_file_atomic((dir / "truth.csv").string(), truth_csv(scene.truth));
    std::cout << "wrote raster.json, dataset.json, truth.csv to " << out_dir << "\n";
    return 0;
}

int run_correct(const std::string& raster_path, const std::string& detections_path,
                const std::string& out_path, const CorrectionConfig& cfg) {
    cfg.validate();
    const RasterGrid grid = load_raster(raster_path, format_for(raster_path));
    EchoDataset dataset = parse_dataset(detections_path);
    std::vector<EchoTrajectory> echoes;
    for (const auto& ann : dataset.annotations) echoes.push_back(ann.echo);
    const PeakIndex index = build_peak_index(grid, cfg);
    const auto corrected = correct_keypoints(echoes, index, cfg);
    for (std::size_t i = 0; i < corrected.size(); ++i) {
        dataset.annotations[i].echo = corrected[i];
    }
    write_text_file_atomic(out_path, dataset_to_json(dataset));
    std::cout << "corrected " << corrected.size() << " echoes -> " << out_path << "\n";
    return 0;
}

int run_speed(const std::string& detections_path, const std::optional<std::string>& raster_path,
              const BandTiming& timing, bool per_segment_gaps, const std::string& out_path) {
    timing.validate();
    const EchoDataset detections = parse_dataset(detections_path);
    std::optional<RasterGrid> grid;
    if (raster_path) grid = load_raster(*raster_path, format_for(*raster_path));
    const SegmentGaps gaps =
        per_segment_gaps ? SegmentGaps::double_green_gap : SegmentGaps::uniform;
    SpeedResult result = compute_speeds(detections, timing, grid, gaps);
    write_text_file_atomic(out_path, velocity_csv(std::move(result.rows)));
    std::cout << "wrote " << result.located.size() << " velocity rows -> " << out_path << "\n";
    return 0;
}

int run_eval(const std::string& gt_path, const std::string& pred_path,
             const std::optional<std::string>& out_path, OksConfig cfg) {
    const EchoDataset gts = parse_dataset(gt_path);
    const EchoDataset preds = parse_dataset(pred_path);
    const EvalReport report = evaluate(preds, gts, cfg);
    const std::string json = report.to_json();
    if (out_path) {
        write_text_file_atomic(*out_path, json);
    }
    std::cout << json << "\n";
    return 0;
}

int run_drone_speed(const std::string& tracks_path, const DroneCameraSpec& spec,
                    const std::string& metric_name, const std::string& out_path) {
    spec.validate();
    const DroneDistanceMetric metric = metric_name == "euclidean"
                                           ? DroneDistanceMetric::euclidean
                                           : DroneDistanceMetric::as_printed;
    const auto tracks = parse_drone_tracks_csv(read_text_file(tracks_path));
    std::ostringstream csv;
    csv << "track_id,frames,distance_m,speed_mps,speed_kmh\n";
    for (const auto& t : tracks) {
        const double d = drone_distance(t, spec, metric);
        const double v = drone_velocity(t, spec, metric);
        csv << t.track_id << ','
            << (t.observations.back().frame - t.observations.front().frame) << ','
            << format_double(d) << ',' << format_double(v) << ',' << format_double(3.6 * v)
            << '\n';
    }
    write_text_file_atomic(out_path, csv.str());
    std::cout << "wrote " << tracks.size() << " drone speeds -> " << out_path << "\n";
    return 0;
}

int run_gps_residuals(const std::string& gps_path, const std::string& detections_path,
                      const BandTiming& timing, const GpsMatchOptions& options,
                      double split_kmh, const std::string& out_path) {
    timing.validate();
    const EchoDataset detections = parse_dataset(detections_path);
    for (const auto& im : detections.images) {
        if (!im.timestamp) {
            throw InvalidInput("image " + std::to_string(im.id) +
                               " lacks a capture timestamp; required for GPS matching");
        }
    }
    const auto tracks = gps_tracks_from_geojson(read_text_file(gps_path));
    const SpeedResult speeds =
        compute_speeds(detections, timing, std::nullopt, SegmentGaps::uniform);
    const auto matches = match_gps_to_estimates(tracks, speeds.located, options);
    if (matches.empty()) {
        ResidualReport empty;
        empty.split_kmh = split_kmh;
        write_text_file_atomic(out_path, empty.to_json());
        std::cout << "no GPS matches found -> " << out_path << "\n";
        return 0;
    }
    const ResidualReport report = gps_residuals(matches, split_kmh);
    write_text_file_atomic(out_path, report.to_json());
    std::cout << "matched " << matches.size() << " echoes -> " << out_path << "\n";
    return 0;
}

int run_compare(const std::string& a_path, const std::string& b_path,
                const std::string& out_path, const std::optional<std::string>& svg_path,
                const std::string& label_a, const std::string& label_b) {
    const auto a = speeds_from_file(a_path);
    const auto b = speeds_from_file(b_path);
    const ComparisonReport report = compare_samples(a, b);
    write_text_file_atomic(out_path, report.to_json());
    if (svg_path) {
        write_text_file_atomic(*svg_path, histogram_svg(a, b, label_a, label_b));
    }
    std::cout << report.to_json() << "\n";
    return 0;
}

int run_mask(const std::string& raster_path, const std::string& roads_path, double buffer_m,
             const std::string& out_path) {
    const RasterGrid grid = load_raster(raster_path, format_for(raster_path));
    const auto lines = centerlines_from_geojson(read_text_file(roads_path));
    const RoadMask mask = rasterize_road_mask(lines, buffer_m, grid);
    write_text_file_atomic(out_path, road_mask_to_json(mask));
    std::size_t on = 0;
    for (auto v : mask.mask) on += v;
    std::cout << "mask covers " << on << " of " << mask.mask.size() << " pixels -> " << out_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Push-broom satellite vehicle velocimetry pipeline"};
    app.require_subcommand(1);

    // simulate
    std::string sim_spec, sim_out_dir;
    auto* simulate = app.add_subcommand("simulate", "Render a synthetic scene with ground truth");
    simulate->add_option("--spec", sim_spec, "Scene spec JSON")->required();
    simulate->add_option("--out-dir", sim_out_dir, "Output directory")->required();

    // correct
    std::string cor_raster, cor_detections, cor_out;
    CorrectionConfig cor_cfg;
    auto* correct = app.add_subcommand("correct", "Snap keypoints to per-band intensity peaks");
    correct->add_option("--raster", cor_raster, "Raster (json-grid or GeoTIFF)")->required();
    correct->add_option("--detections", cor_detections, "Dataset JSON")->required();
    correct->add_option("--out", cor_out, "Corrected dataset JSON")->required();
    correct->add_option("--peak-height", cor_cfg.h, "Relative peak height h in (0,1)");
    correct->add_option("--neighborhood", cor_cfg.neighborhood, "Odd cell window (>= 3)");
    correct->add_option("--max-shift", cor_cfg.max_shift_distance, "Snap distance in pixels");
    correct->add_option("--connectivity", cor_cfg.connectivity, "4 or 8");

    // speed
    std::string spd_detections, spd_out;
    std::string spd_raster;
    BandTiming spd_timing;
    bool spd_per_segment = false;
    auto* speed = app.add_subcommand("speed", "Estimate ground speeds from corrected echoes");
    speed->add_option("--detections", spd_detections, "Dataset JSON")->required();
    speed->add_option("--raster", spd_raster,
                      "Raster whose geotransform overrides the dataset's");
    speed->add_option("--satellite-velocity", spd_timing.v_satellite_mps,
                      "Satellite ground-track speed, m/s (from ephemeris)")
        ->required();
    speed->add_option("--band-width", spd_timing.w_bands_px, "Band frame width, px");
    speed->add_option("--gsd", spd_timing.d_gsd_m, "Ground sampling distance, m/px")
        ->required();
    speed->add_flag("--per-segment-gaps", spd_per_segment,
                    "Treat red->green as two band intervals");
    speed->add_option("--out", spd_out, "Velocity CSV")->required();

    // eval
    std::string ev_gt, ev_pred;
    std::string ev_out;
    OksConfig ev_cfg;
    auto* eval = app.add_subcommand("eval", "Evaluate detections against ground truth");
    eval->add_option("--gt", ev_gt, "Ground-truth dataset JSON")->required();
    eval->add_option("--pred", ev_pred, "Predicted dataset JSON")->required();
    eval->add_option("--out", ev_out, "Report JSON path");
    eval->add_option("--score-threshold", ev_cfg.score_threshold,
                     "Detections must score strictly above this");
    eval->add_option("--oks-scale", ev_cfg.s, "Object scale in the OKS kernel");
    eval->add_option("--rmse-oks", ev_cfg.rmse_match_threshold,
                     "OKS level at which RMSE pairs are matched");

    // drone-speed
    std::string dr_tracks, dr_out, dr_metric = "as-printed";
    DroneCameraSpec dr_spec;
    auto* drone = app.add_subcommand("drone-speed", "Per-track speeds from drone centroids");
    drone->add_option("--tracks", dr_tracks, "CSV track_id,frame,cx_px,cy_px,altitude_m")
        ->required();
    drone->add_option("--focal-mm", dr_spec.focal_mm, "Focal length, mm");
    drone->add_option("--sensor-w-mm", dr_spec.sensor_w_mm, "Sensor width, mm");
    drone->add_option("--sensor-h-mm", dr_spec.sensor_h_mm, "Sensor height, mm");
    drone->add_option("--image-w", dr_spec.image_w_px, "Image width, px");
    drone->add_option("--image-h", dr_spec.image_h_px, "Image height, px");
    drone->add_option("--fps", dr_spec.fps, "Frame rate");
    drone->add_option("--metric", dr_metric, "as-printed or euclidean")
        ->check(CLI::IsMember({"as-printed", "euclidean"}));
    drone->add_option("--out", dr_out, "Speed CSV")->required();

    // gps-residuals
    std::string gr_gps, gr_detections, gr_out;
    BandTiming gr_timing;
    GpsMatchOptions gr_options;
    double gr_split = 100.0;
    std::string gr_window_start = "09:00", gr_window_end = "11:00";
    auto* gps = app.add_subcommand("gps-residuals",
                                   "Match echoes to GPS points and report residuals");
    gps->add_option("--gps", gr_gps, "GPS tracks GeoJSON")->required();
    gps->add_option("--detections", gr_detections, "Dataset JSON with timestamps")->required();
    gps->add_option("--satellite-velocity", gr_timing.v_satellite_mps, "m/s")->required();
    gps->add_option("--band-width", gr_timing.w_bands_px, "Band frame width, px");
    gps->add_option("--gsd", gr_timing.d_gsd_m, "m/px")->required();
    gps->add_option("--buffer", gr_options.buffer_m, "Spatial gate, metres");
    gps->add_option("--time-tolerance", gr_options.time_tolerance_s, "Temporal gate, seconds");
    gps->add_option("--window-start", gr_window_start, "Local window start hh:mm");
    gps->add_option("--window-end", gr_window_end, "Local window end hh:mm");
    gps->add_option("--split-kmh", gr_split, "Bucket boundary on predicted speed");
    gps->add_option("--out", gr_out, "Residual report JSON")->required();

    // compare
    std::string cp_a, cp_b, cp_out;
    std::string cp_svg;
    std::string cp_label_a = "sample_a", cp_label_b = "sample_b";
    auto* compare = app.add_subcommand("compare", "Descriptive stats and KS test of two samples");
    compare->add_option("--sample-a", cp_a, "Speed CSV or one value per line")->required();
    compare->add_option("--sample-b", cp_b, "Speed CSV or one value per line")->required();
    compare->add_option("--out", cp_out, "Comparison report JSON")->required();
    compare->add_option("--svg", cp_svg, "Optional histogram SVG path");
    compare->add_option("--label-a", cp_label_a, "Label for sample A");
    compare->add_option("--label-b", cp_label_b, "Label for sample B");

    // mask
    std::string mk_raster, mk_roads, mk_out;
    double mk_buffer = 30.0;
    auto* mask = app.add_subcommand("mask", "Rasterize a buffered road mask");
    mask->add_option("--raster", mk_raster, "Raster defining the grid")->required();
    mask->add_option("--roads", mk_roads, "Centerline GeoJSON in projected metres")->required();
    mask->add_option("--buffer", mk_buffer, "Buffer radius, metres");
    mask->add_option("--out", mk_out, "Mask JSON")->required();

    CLI11_PARSE(app, argc, argv);

    auto parse_hhmm = [](const std::string& s) {
        if (s.size() != 5 || s[2] != ':') throw InvalidInput("expected hh:mm, got " + s);
        return (std::stoi(s.substr(0, 2)) * 60 + std::stoi(s.substr(3, 2))) * 60;
    };

    try {
        if (simulate->parsed()) return run_simulate(sim_spec, sim_out_dir);
        if (correct->parsed()) return run_correct(cor_raster, cor_detections, cor_out, cor_cfg);
        if (speed->parsed()) {
            std::optional<std::string> raster;
            if (!spd_raster.empty()) raster = spd_raster;
            return run_speed(spd_detections, raster, spd_timing, spd_per_segment, spd_out);
        }
        if (eval->parsed()) {
            std::optional<std::string> out;
            if (!ev_out.empty()) out = ev_out;
            return run_eval(ev_gt, ev_pred, out, ev_cfg);
        }
        if (drone->parsed()) return run_drone_speed(dr_tracks, dr_spec, dr_metric, dr_out);
        if (gps->parsed()) {
            gr_options.window_start_s = parse_hhmm(gr_window_start);
            gr_options.window_end_s = parse_hhmm(gr_window_end);
            return run_gps_residuals(gr_gps, gr_detections, gr_timing, gr_options, gr_split,
                                     gr_out);
        }
        if (compare->parsed()) {
            std::optional<std::string> svg;
            if (!cp_svg.empty()) svg = cp_svg;
            return run_compare(cp_a, cp_b, cp_out, svg, cp_label_a, cp_label_b);
        }
        if (mask->parsed()) return run_mask(mk_raster, mk_roads, mk_buffer, mk_out);
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
