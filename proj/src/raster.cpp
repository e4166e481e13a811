#include "echovel/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

#include "echovel/geotiff.hpp"

namespace echovel {

using nlohmann::json;

int RasterGrid::band_index(const std::string& label) const {
    for (std::size_t i = 0; i < band_labels.size(); ++i) {
        if (band_labels[i] == label) return static_cast<int>(i);
    }
    return -1;
}

void validate_raster(const RasterGrid& grid) {
    if (grid.width <= 0 || grid.height <= 0) {
        throw InvalidInput("raster dimensions must be positive");
    }
    if (grid.bands.empty()) {
        throw InvalidInput("raster has no bands");
    }
    if (grid.band_labels.size() != grid.bands.size()) {
        throw InvalidInput("band label count does not match band count");
    }
    std::set<std::string> labels(grid.band_labels.begin(), grid.band_labels.end());
    if (labels.size() != grid.band_labels.size()) {
        throw InvalidInput("band labels must be unique");
    }
    const std::size_t expected = grid.pixel_count();
    for (std::size_t b = 0; b < grid.bands.size(); ++b) {
        const auto& v = grid.bands[b].values;
        if (v.size() != expected) {
            throw InvalidInput("band '" + grid.band_labels[b] + "' has " +
                               std::to_string(v.size()) + " values, expected " +
                               std::to_string(expected));
        }
        for (double x : v) {
            if (!std::isfinite(x)) {
                throw InvalidInput("band '" + grid.band_labels[b] + "' contains non-finite values");
            }
            if (x < 0.0) {
                throw InvalidInput("band '" + grid.band_labels[b] + "' contains negative values");
            }
        }
    }
    if (!grid.geotransform.invertible()) {
        throw InvalidInput("geotransform is not invertible");
    }
}

BandPlane normalize_band(const BandPlane& band) {
    if (band.values.empty()) {
        throw InvalidInput("cannot normalize an empty band");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double v : band.values) {
        if (!std::isfinite(v)) {
            throw InvalidInput("cannot normalize a band with non-finite values");
        }
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    BandPlane out;
    out.values.resize(band.values.size());
    if (hi == lo) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < band.values.size(); ++i) {
        out.values[i] = (band.values[i] - lo) / range;
    }
    return out;
}

namespace {

json transform_to_json(const AffineTransform& t) {
    return json::array({t.a, t.b, t.c, t.d, t.e, t.f});
}

AffineTransform transform_from_json(const json& j) {
    if (!j.is_array() || j.size() != 6) {
        throw InvalidInput("geotransform must be an array of 6 numbers");
    }
    AffineTransform t;
    t.a = j[0].get<double>();
    t.b = j[1].get<double>();
    t.c = j[2].get<double>();
    t.d = j[3].get<double>();
    t.e = j[4].get<double>();
    t.f = j[5].get<double>();
    return t;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open file for writing: " + path);
    }
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

}  // namespace

std::string raster_to_json(const RasterGrid& grid) {
    json j;
    j["width"] = grid.width;
    j["height"] = grid.height;
    j["geotransform"] = transform_to_json(grid.geotransform);
    j["band_labels"] = grid.band_labels;
    json bands = json::array();
    for (const auto& b : grid.bands) {
        bands.push_back(b.values);
    }
    j["bands"] = std::move(bands);
    return j.dump();
}

RasterGrid raster_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("json-grid parse error: ") + e.what());
    }
    RasterGrid grid;
    try {
        grid.width = j.at("width").get<int>();
        grid.height = j.at("height").get<int>();
        grid.geotransform = transform_from_json(j.at("geotransform"));
        grid.band_labels = j.at("band_labels").get<std::vector<std::string>>();
        for (const auto& b : j.at("bands")) {
            BandPlane plane;
            plane.values = b.get<std::vector<double>>();
            grid.bands.push_back(std::move(plane));
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("json-grid schema error: ") + e.what());
    }
    validate_raster(grid);
    return grid;
}

RasterGrid load_raster(const std::string& path, RasterFormat format) {
    RasterGrid grid;
    switch (format) {
        case RasterFormat::json_grid:
            grid = raster_from_json(read_file(path));
            break;
        case RasterFormat::geotiff:
            grid = read_geotiff(path);
            validate_raster(grid);
            break;
    }
    if (grid.bands.size() < 3) {
        throw InvalidInput("band count < 3 in " + path + " (got " +
                           std::to_string(grid.bands.size()) + ")");
    }
    return grid;
}

void save_raster(const RasterGrid& grid, const std::string& path, RasterFormat format) {
    validate_raster(grid);
    switch (format) {
        case RasterFormat::json_grid:
            write_file(path, raster_to_json(grid));
            break;
        case RasterFormat::geotiff:
            write_geotiff(grid, path);
            break;
    }
}

RoadMask rasterize_road_mask(const std::vector<Polyline>& centerlines, double buffer_m,
                             const RasterGrid& grid) {
    if (buffer_m < 0.0) {
        throw InvalidInput("road buffer must be >= 0");
    }
    if (!grid.geotransform.invertible()) {
        throw InvalidInput("geotransform is not invertible");
    }
    RoadMask out;
    out.width = grid.width;
    out.height = grid.height;
    out.mask.assign(grid.pixel_count(), 0);

    const double buf2 = buffer_m * buffer_m;
    const AffineTransform& t = grid.geotransform;

    auto mark_segment = [&](const Vec2& s0, const Vec2& s1) {
        // World-space bbox of the buffered segment, mapped to a pixel-space
        // bbox through the four corners (affine images of boxes are
        // parallelograms, so corner extremes bound the region).
        const double wx0 = std::min(s0.x, s1.x) - buffer_m;
        const double wx1 = std::max(s0.x, s1.x) + buffer_m;
        const double wy0 = std::min(s0.y, s1.y) - buffer_m;
        const double wy1 = std::max(s0.y, s1.y) + buffer_m;
        double cmin = std::numeric_limits<double>::infinity();
        double cmax = -cmin, rmin = cmin, rmax = -cmin;
        for (double wx : {wx0, wx1}) {
            for (double wy : {wy0, wy1}) {
                const Vec2 p = world_to_pixel(t, wx, wy);
                cmin = std::min(cmin, p.x);
                cmax = std::max(cmax, p.x);
                rmin = std::min(rmin, p.y);
                rmax = std::max(rmax, p.y);
            }
        }
        const int c0 = std::max(0, static_cast<int>(std::floor(cmin)) - 1);
        const int c1 = std::min(grid.width - 1, static_cast<int>(std::ceil(cmax)) + 1);
        const int r0 = std::max(0, static_cast<int>(std::floor(rmin)) - 1);
        const int r1 = std::min(grid.height - 1, static_cast<int>(std::ceil(rmax)) + 1);
        for (int row = r0; row <= r1; ++row) {
            for (int col = c0; col <= c1; ++col) {
                const std::size_t idx = static_cast<std::size_t>(row) * grid.width + col;
                if (out.mask[idx]) continue;
                const Vec2 center = pixel_center_world(t, col, row);
                if (point_segment_dist2(center, s0, s1) <= buf2) {
                    out.mask[idx] = 1;
                }
            }
        }
    };

    for (const auto& line : centerlines) {
        if (line.empty()) continue;
        if (line.size() == 1) {
            mark_segment(line[0], line[0]);
            continue;
        }
        for (std::size_t i = 0; i + 1 < line.size(); ++i) {
            mark_segment(line[i], line[i + 1]);
        }
    }
    return out;
}

std::string road_mask_to_json(const RoadMask& mask) {
    json j;
    j["width"] = mask.width;
    j["height"] = mask.height;
    json cells = json::array();
    for (auto v : mask.mask) {
        cells.push_back(static_cast<int>(v));
    }
    j["mask"] = std::move(cells);
    return j.dump();
}

RoadMask road_mask_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("road-mask parse error: ") + e.what());
    }
    RoadMask mask;
    try {
        mask.width = j.at("width").get<int>();
        mask.height = j.at("height").get<int>();
        for (const auto& v : j.at("mask")) {
            mask.mask.push_back(v.get<int>() != 0 ? 1 : 0);
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("road-mask schema error: ") + e.what());
    }
    if (mask.width <= 0 || mask.height <= 0 ||
        mask.mask.size() != static_cast<std::size_t>(mask.width) * mask.height) {
        throw InvalidInput("road-mask dimensions do not match cell count");
    }
    return mask;
}

}  // namespace echovel
