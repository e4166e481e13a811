#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "echovel/raster.hpp"

namespace echovel {

enum class Band : int { blue = 0, red = 1, green = 2 };

const char* band_name(Band b);

struct Keypoint {
    double col = 0.0;  // fractional pixels
    double row = 0.0;
    Band band = Band::blue;
};

struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
};

// One vehicle's three band-ordered keypoints (blue, red, green) with its
// bounding box and detection confidence (1.0 for ground truth).
struct EchoTrajectory {
    std::int64_t id = 0;
    std::array<Keypoint, 3> keypoints{};
    BBox bbox;
    double score = 1.0;

    const Keypoint& kp(Band b) const { return keypoints[static_cast<int>(b)]; }
};

struct ImageInfo {
    std::int64_t id = 0;
    std::string file;
    int width = 0;
    int height = 0;
    AffineTransform geotransform;
    std::optional<std::string> timestamp;  // ISO 8601, as recorded
};

struct DatasetEntry {
    EchoTrajectory echo;
    std::int64_t image_id = 0;
};

struct EchoDataset {
    std::vector<ImageInfo> images;
    std::vector<DatasetEntry> annotations;

    const ImageInfo* find_image(std::int64_t image_id) const;
};

// Axis-aligned hull of the three keypoints padded by 1 px on every side.
BBox bbox_from_keypoints(const std::array<Keypoint, 3>& kps);

// Sum of the blue->red and red->green Euclidean pixel distances.
double trajectory_length_px(const EchoTrajectory& e);

EchoDataset parse_dataset(const std::string& path);
EchoDataset dataset_from_json(const std::string& text);
// Canonical form: images and annotations sorted by id, visibility fixed at 2.
std::string dataset_to_json(const EchoDataset& d);
void save_dataset(const EchoDataset& d, const std::string& path);

struct RasterViolation {
    std::int64_t annotation_id = 0;  // or image id for dimension mismatches
    std::string message;
};

// Reports out-of-bounds keypoints and image-entry dimension mismatches
// against the grid. Violations are data, not errors; empty means clean.
std::vector<RasterViolation> validate_against_raster(const EchoDataset& d, const RasterGrid& g);

}  // namespace echovel
