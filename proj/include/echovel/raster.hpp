#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echovel/geometry.hpp"

namespace echovel {

// One band's intensities, row-major, dimensionless and non-negative.
struct BandPlane {
    std::vector<double> values;
};

// Multi-band pixel grid with an affine geotransform. All bands share the
// same width*height; band order is the stored order (blue, red, green for
// the push-broom pipeline).
struct RasterGrid {
    int width = 0;
    int height = 0;
    std::vector<BandPlane> bands;
    std::vector<std::string> band_labels;
    AffineTransform geotransform;

    std::size_t pixel_count() const {
        return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    }
    double at(int band, int col, int row) const {
        return bands[static_cast<std::size_t>(band)]
            .values[static_cast<std::size_t>(row) * width + col];
    }
    double& at(int band, int col, int row) {
        return bands[static_cast<std::size_t>(band)]
            .values[static_cast<std::size_t>(row) * width + col];
    }
    // Index of the band with the given label, or -1.
    int band_index(const std::string& label) const;
};

// Boolean region of interest with the same dimensions as its target grid.
struct RoadMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> mask;  // row-major, 0/1

    bool at(int col, int row) const {
        return mask[static_cast<std::size_t>(row) * width + col] != 0;
    }
};

enum class RasterFormat { json_grid, geotiff };

// Throws InvalidInput if the grid violates its invariants (mismatched band
// sizes, non-finite or negative values, duplicate labels, bad transform).
void validate_raster(const RasterGrid& grid);

// Min-max scales a band to [0,1]. A constant band maps to all zeros so
// blank clips do not abort batch runs. Idempotent.
BandPlane normalize_band(const BandPlane& band);

RasterGrid load_raster(const std::string& path, RasterFormat format);
void save_raster(const RasterGrid& grid, const std::string& path, RasterFormat format);

// Serialized json-grid document (canonical test format).
std::string raster_to_json(const RasterGrid& grid);
RasterGrid raster_from_json(const std::string& text);

using Polyline = std::vector<Vec2>;

// Marks pixels whose center world point lies within `buffer_m` of any
// centerline segment. Empty centerline set yields an all-false mask.
RoadMask rasterize_road_mask(const std::vector<Polyline>& centerlines, double buffer_m,
                             const RasterGrid& grid);

std::string road_mask_to_json(const RoadMask& mask);
RoadMask road_mask_from_json(const std::string& text);

}  // namespace echovel
