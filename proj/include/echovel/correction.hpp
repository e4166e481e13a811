#pragma once

#include <array>
#include <vector>

#include "echovel/echoes.hpp"
#include "echovel/kdtree.hpp"
#include "echovel/raster.hpp"

namespace echovel {

struct CorrectionConfig {
    double h = 0.02;                 // minimum relative peak height, in (0,1)
    int neighborhood = 3;            // odd cell window; 3 selects 8-connectivity
    double max_shift_distance = 2.0; // pixels
    int connectivity = 8;            // 4 or 8

    void validate() const;
};

// Grayscale reconstruction by dilation of `marker` under `mask` (marker must
// be <= mask pointwise). Values are propagated by max and clamped by the
// mask; the result is the unique largest function below the mask that can be
// grown from the marker.
std::vector<double> reconstruct_by_dilation(const std::vector<double>& marker,
                                            const std::vector<double>& mask, int width,
                                            int height, int connectivity);

// Pixels of all regional maxima of height >= h: reconstruct (band - h) under
// band, then collect connected plateaus of the reconstruction that are
// strictly above every neighboring pixel. Expects a normalized band. A
// neighborhood larger than 3 widens the window to n x n cells.
std::vector<PixelCoord> detect_h_maxima(const BandPlane& band, int width, int height, double h,
                                        int connectivity, int neighborhood = 3);

// Per-band nearest-neighbor index over detected intensity peaks.
class PeakIndex {
public:
    PeakIndex() = default;
    PeakIndex(std::array<KdTree2, 3> trees) : trees_(std::move(trees)) {}

    const KdTree2& tree(Band b) const { return trees_[static_cast<int>(b)]; }

private:
    std::array<KdTree2, 3> trees_;
};

// Normalizes each of the grid's blue/red/green bands (idempotent, so
// already-normalized input is fine), detects h-maxima and builds one k-d
// tree per band. Bands are resolved by label, falling back to stored order.
PeakIndex build_peak_index(const RasterGrid& grid, const CorrectionConfig& cfg);

// Snaps each keypoint to the nearest peak of its own band when that peak is
// strictly closer than cfg.max_shift_distance; otherwise the keypoint is
// retained. Bounding boxes are recomputed; scores are unchanged.
std::vector<EchoTrajectory> correct_keypoints(const std::vector<EchoTrajectory>& echoes,
                                              const PeakIndex& index,
                                              const CorrectionConfig& cfg);

}  // namespace echovel
