#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "echovel/correction.hpp"
#include "echovel/echoes.hpp"
#include "echovel/metrics.hpp"
#include "echovel/raster.hpp"
#include "echovel/synth.hpp"
#include "echovel/validation.hpp"
#include "echovel/velocity.hpp"

namespace py = pybind11;
using namespace echovel;

namespace {

AffineTransform transform_from_seq(const std::vector<double>& v) {
    if (v.size() != 6) {
        throw InvalidInput("geotransform must hold 6 coefficients [a,b,c,d,e,f]");
    }
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

std::vector<double> transform_to_seq(const AffineTransform& t) {
    return {t.a, t.b, t.c, t.d, t.e, t.f};
}

RasterGrid grid_from_numpy(py::array_t<double, py::array::c_style | py::array::forcecast> bands,
                           const std::vector<std::string>& labels,
                           const std::vector<double>& geotransform) {
    if (bands.ndim() != 3) {
        throw InvalidInput("bands must be a (nbands, height, width) array");
    }
    RasterGrid g;
    const auto nb = bands.shape(0);
    g.height = static_cast<int>(bands.shape(1));
    g.width = static_cast<int>(bands.shape(2));
    g.band_labels = labels;
    g.geotransform = transform_from_seq(geotransform);
    const double* data = bands.data();
    const std::size_t plane = static_cast<std::size_t>(g.width) * g.height;
    for (py::ssize_t b = 0; b < nb; ++b) {
        BandPlane p;
        p.values.assign(data + b * plane, data + (b + 1) * plane);
        g.bands.push_back(std::move(p));
    }
    validate_raster(g);
    return g;
}

py::array_t<double> grid_to_numpy(const RasterGrid& g) {
    py::array_t<double> out({static_cast<py::ssize_t>(g.bands.size()),
                             static_cast<py::ssize_t>(g.height),
                             static_cast<py::ssize_t>(g.width)});
    double* dst = out.mutable_data();
    const std::size_t plane = g.pixel_count();
    for (std::size_t b = 0; b < g.bands.size(); ++b) {
        std::copy(g.bands[b].values.begin(), g.bands[b].values.end(), dst + b * plane);
    }
    return out;
}

EchoTrajectory echo_from_python(std::int64_t id,
                                const std::vector<std::pair<double, double>>& keypoints,
                                double score) {
    if (keypoints.size() != 3) {
        throw InvalidInput("an echo needs exactly 3 keypoints ordered blue, red, green");
    }
    EchoTrajectory e;
    e.id = id;
    for (int b = 0; b < 3; ++b) {
        e.keypoints[b] = {keypoints[b].first, keypoints[b].second, static_cast<Band>(b)};
    }
    e.bbox = bbox_from_keypoints(e.keypoints);
    e.score = score;
    return e;
}

py::dict stats_to_dict(const DescriptiveStats& s) {
    py::dict d;
    d["n"] = s.n;
    d["mean"] = s.mean;
    d["std"] = s.stddev ? py::object(py::float_(*s.stddev)) : py::none();
    d["min"] = s.min;
    d["max"] = s.max;
    d["skewness"] = s.skewness ? py::object(py::float_(*s.skewness)) : py::none();
    d["excess_kurtosis"] =
        s.excess_kurtosis ? py::object(py::float_(*s.excess_kurtosis)) : py::none();
    return d;
}

py::dict report_to_dict(const EvalReport& r) {
    py::dict d;
    py::dict ap;
    for (const auto& [key, value] : r.ap_per_threshold) ap[py::str(key)] = value;
    d["ap_per_threshold"] = ap;
    d["map"] = r.map ? py::object(py::float_(*r.map)) : py::none();
    d["trajectory_rmse_px"] =
        r.trajectory_rmse_px ? py::object(py::float_(*r.trajectory_rmse_px)) : py::none();
    d["tp"] = r.tp;
    d["fp"] = r.fp;
    d["fn"] = r.fn;
    d["score_threshold"] = r.score_threshold;
    d["stationary_gt"] = r.stationary_gt;
    return d;
}

}  // namespace

PYBIND11_MODULE(_echovel, m) {
    m.doc() = "Vehicle velocimetry from push-broom satellite band offsets";

    py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_IOError);

    py::class_<RasterGrid>(m, "RasterGrid")
        .def(py::init(&grid_from_numpy), py::arg("bands"), py::arg("band_labels"),
             py::arg("geotransform"))
        .def_readonly("width", &RasterGrid::width)
        .def_readonly("height", &RasterGrid::height)
        .def_readonly("band_labels", &RasterGrid::band_labels)
        .def_property_readonly("geotransform",
                               [](const RasterGrid& g) { return transform_to_seq(g.geotransform); })
        .def_property_readonly("bands", &grid_to_numpy)
        .def("__repr__", [](const RasterGrid& g) {
            return "<RasterGrid " + std::to_string(g.bands.size()) + "x" +
                   std::to_string(g.height) + "x" + std::to_string(g.width) + ">";
        });

    m.def(
        "load_raster",
        [](const std::string& path, const std::string& format) {
            return load_raster(path, format == "geotiff" ? RasterFormat::geotiff
                                                         : RasterFormat::json_grid);
        },
        py::arg("path"), py::arg("format") = "json-grid");
    m.def(
        "save_raster",
        [](const RasterGrid& g, const std::string& path, const std::string& format) {
            save_raster(g, path, format == "geotiff" ? RasterFormat::geotiff
                                                     : RasterFormat::json_grid);
        },
        py::arg("grid"), py::arg("path"), py::arg("format") = "json-grid");

    m.def(
        "normalize_band",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> band) {
            BandPlane plane;
            plane.values.assign(band.data(), band.data() + band.size());
            const BandPlane out = normalize_band(plane);
            py::array_t<double> result(std::vector<py::ssize_t>(
                band.shape(), band.shape() + band.ndim()));
            std::copy(out.values.begin(), out.values.end(), result.mutable_data());
            return result;
        },
        py::arg("band"), "Min-max scale a band to [0,1]; constant bands map to zeros.");

    m.def("pixel_to_world",
          [](const std::vector<double>& t, double col, double row) {
              const Vec2 w = pixel_to_world(transform_from_seq(t), col, row);
              return std::make_pair(w.x, w.y);
          });
    m.def("world_to_pixel", [](const std::vector<double>& t, double x, double y) {
        const Vec2 p = world_to_pixel(transform_from_seq(t), x, y);
        return std::make_pair(p.x, p.y);
    });

    py::class_<EchoTrajectory>(m, "EchoTrajectory")
        .def(py::init(&echo_from_python), py::arg("id"), py::arg("keypoints"),
             py::arg("score") = 1.0)
        .def_readonly("id", &EchoTrajectory::id)
        .def_readonly("score", &EchoTrajectory::score)
        .def_property_readonly("keypoints",
                               [](const EchoTrajectory& e) {
                                   std::vector<std::pair<double, double>> out;
                                   for (const auto& kp : e.keypoints) {
                                       out.push_back({kp.col, kp.row});
                                   }
                                   return out;
                               })
        .def_property_readonly("bbox",
                               [](const EchoTrajectory& e) {
                                   return std::make_tuple(e.bbox.x, e.bbox.y, e.bbox.w,
                                                          e.bbox.h);
                               })
        .def("length_px", &trajectory_length_px)
        .def("__repr__", [](const EchoTrajectory& e) {
            return "<EchoTrajectory id=" + std::to_string(e.id) + ">";
        });

    py::class_<CorrectionConfig>(m, "CorrectionConfig")
        .def(py::init([](double h, int neighborhood, double max_shift, int connectivity) {
                 CorrectionConfig cfg{h, neighborhood, max_shift, connectivity};
                 cfg.validate();
                 return cfg;
             }),
             py::arg("h") = 0.02, py::arg("neighborhood") = 3,
             py::arg("max_shift_distance") = 2.0, py::arg("connectivity") = 8)
        .def_readonly("h", &CorrectionConfig::h)
        .def_readonly("max_shift_distance", &CorrectionConfig::max_shift_distance);

    m.def(
        "detect_h_maxima",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> band, double h,
           int connectivity) {
            if (band.ndim() != 2) throw InvalidInput("band must be a 2-D array");
            BandPlane plane;
            plane.values.assign(band.data(), band.data() + band.size());
            const auto peaks =
                detect_h_maxima(plane, static_cast<int>(band.shape(1)),
                                static_cast<int>(band.shape(0)), h, connectivity);
            py::array_t<std::int64_t> out(
                {static_cast<py::ssize_t>(peaks.size()), static_cast<py::ssize_t>(2)});
            auto* dst = out.mutable_data();
            for (std::size_t i = 0; i < peaks.size(); ++i) {
                dst[2 * i] = peaks[i].col;
                dst[2 * i + 1] = peaks[i].row;
            }
            return out;
        },
        py::arg("band"), py::arg("h") = 0.02, py::arg("connectivity") = 8,
        "Peak pixels (col,row) of all regional maxima of height >= h.");

    m.def(
        "correct_keypoints",
        [](const std::vector<EchoTrajectory>& echoes, const RasterGrid& grid,
           const CorrectionConfig& cfg) {
            return correct_keypoints(echoes, build_peak_index(grid, cfg), cfg);
        },
        py::arg("echoes"), py::arg("grid"), py::arg("config") = CorrectionConfig{},
        "Snap each keypoint to its own band's nearest intensity peak.");

    py::class_<BandTiming>(m, "BandTiming")
        .def(py::init([](double v_satellite, double w_bands, double gsd) {
                 BandTiming t{v_satellite, w_bands, gsd};
                 t.validate();
                 return t;
             }),
             py::arg("satellite_velocity_mps"), py::arg("band_width_px") = 660.0,
             py::arg("gsd_m") = 3.7)
        .def_readonly("satellite_velocity_mps", &BandTiming::v_satellite_mps)
        .def_readonly("band_width_px", &BandTiming::w_bands_px)
        .def_readonly("gsd_m", &BandTiming::d_gsd_m)
        .def("interval_s", &band_interval);

    py::class_<VelocityEstimate>(m, "VelocityEstimate")
        .def_readonly("echo_id", &VelocityEstimate::echo_id)
        .def_readonly("d_mean_m", &VelocityEstimate::d_mean_m)
        .def_readonly("delta_t_s", &VelocityEstimate::delta_t_s)
        .def_readonly("speed_mps", &VelocityEstimate::speed_mps)
        .def_readonly("speed_kmh", &VelocityEstimate::speed_kmh)
        .def_readonly("heading_deg", &VelocityEstimate::heading_deg)
        .def_readonly("score", &VelocityEstimate::score)
        .def("__repr__", [](const VelocityEstimate& v) {
            return "<VelocityEstimate " + std::to_string(v.speed_mps) + " m/s>";
        });

    m.def(
        "estimate_velocity",
        [](const EchoTrajectory& e, const std::vector<double>& t, const BandTiming& timing) {
            return estimate_velocity(e, transform_from_seq(t), timing);
        },
        py::arg("echo"), py::arg("geotransform"), py::arg("timing"));
    m.def("band_interval", &band_interval, py::arg("timing"));
    m.def("rmse_to_velocity_error", &rmse_to_velocity_error, py::arg("rmse_px"),
          py::arg("gsd_m"), py::arg("delta_t_s"));

    py::class_<OksConfig>(m, "OksConfig")
        .def(py::init([](double s, double score_threshold) {
                 OksConfig cfg;
                 cfg.s = s;
                 cfg.score_threshold = score_threshold;
                 cfg.validate();
                 return cfg;
             }),
             py::arg("s") = 1.0, py::arg("score_threshold") = 0.7)
        .def_readonly("s", &OksConfig::s)
        .def_readonly("score_threshold", &OksConfig::score_threshold);

    m.def("oks", &oks, py::arg("pred"), py::arg("gt"), py::arg("config") = OksConfig{},
          "Object keypoint similarity normalized by the GT trajectory length.");

    py::class_<EchoDataset>(m, "EchoDataset")
        .def_property_readonly("annotations",
                               [](const EchoDataset& d) {
                                   std::vector<EchoTrajectory> out;
                                   for (const auto& a : d.annotations) out.push_back(a.echo);
                                   return out;
                               })
        .def("__len__", [](const EchoDataset& d) { return d.annotations.size(); });

    m.def("parse_dataset", &parse_dataset, py::arg("path"));
    m.def("dataset_from_json", &dataset_from_json, py::arg("text"));
    m.def("dataset_to_json", &dataset_to_json, py::arg("dataset"));
    m.def(
        "evaluate",
        [](const EchoDataset& preds, const EchoDataset& gts, const OksConfig& cfg) {
            return report_to_dict(evaluate(preds, gts, cfg));
        },
        py::arg("predictions"), py::arg("ground_truth"), py::arg("config") = OksConfig{});

    m.def("ks_two_sample",
          [](const std::vector<double>& a, const std::vector<double>& b) {
              const KsResult r = ks_two_sample(a, b);
              return std::make_pair(r.statistic, r.p_value);
          },
          py::arg("a"), py::arg("b"), "Two-sample KS (statistic, p_value).");
    m.def(
        "describe", [](const std::vector<double>& v) { return stats_to_dict(describe(v)); },
        py::arg("sample"));

    py::class_<DroneCameraSpec>(m, "DroneCameraSpec")
        .def(py::init([](double focal, double sw, double sh, int iw, int ih, double fps) {
                 DroneCameraSpec s{focal, sw, sh, iw, ih, fps};
                 s.validate();
                 return s;
             }),
             py::arg("focal_mm") = 4.4, py::arg("sensor_w_mm") = 6.4,
             py::arg("sensor_h_mm") = 4.8, py::arg("image_w_px") = 8000,
             py::arg("image_h_px") = 6000, py::arg("fps") = 30.0);

    m.def(
        "drone_gsd",
        [](const DroneCameraSpec& spec, double altitude) {
            const Gsd g = drone_gsd(spec, altitude);
            return std::make_pair(g.w, g.h);
        },
        py::arg("spec"), py::arg("altitude_m"));
    m.def(
        "drone_velocity",
        [](const std::vector<std::tuple<std::int64_t, double, double, double>>& observations,
           const DroneCameraSpec& spec, const std::string& metric) {
            DroneTrack t;
            t.track_id = 0;
            for (const auto& [frame, cx, cy, alt] : observations) {
                t.observations.push_back({frame, cx, cy, alt});
            }
            return drone_velocity(t, spec,
                                  metric == "euclidean" ? DroneDistanceMetric::euclidean
                                                        : DroneDistanceMetric::as_printed);
        },
        py::arg("observations"), py::arg("spec") = DroneCameraSpec{},
        py::arg("metric") = "as-printed",
        "Speed from (frame, cx_px, cy_px, altitude_m) observations.");

    py::class_<SceneOutput>(m, "SceneOutput")
        .def_readonly("grid", &SceneOutput::grid)
        .def_property_readonly("ground_truth",
                               [](const SceneOutput& s) { return s.ground_truth; })
        .def_property_readonly("truth", [](const SceneOutput& s) {
            std::vector<std::tuple<std::int64_t, double, double, bool>> out;
            for (const auto& r : s.truth) {
                out.push_back({r.vehicle_id, r.speed_mps, r.heading_deg, r.clipped});
            }
            return out;
        });

    m.def(
        "render_scene",
        [](const std::string& spec_json) { return render_scene(scene_spec_from_json(spec_json)); },
        py::arg("spec_json"),
        "Render a synthetic scene from a scene-spec JSON string.");
}
