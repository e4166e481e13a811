#include "echovel/correction.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>

namespace echovel {

namespace {

using Offset = std::pair<int, int>;  // (drow, dcol)

// Neighbor offsets for the requested topology: a 4-connected cross or a
// square window (8-connectivity is the 3x3 window).
std::vector<Offset> neighbor_offsets(int connectivity, int window) {
    std::vector<Offset> out;
    if (connectivity == 4 && window == 3) {
        out = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};
        return out;
    }
    const int k = window / 2;
    for (int dr = -k; dr <= k; ++dr) {
        for (int dc = -k; dc <= k; ++dc) {
            if (dr == 0 && dc == 0) continue;
            out.push_back({dr, dc});
        }
    }
    return out;
}

// Vincent's hybrid grayscale reconstruction: forward/backward raster sweeps
// followed by FIFO propagation. Only copies, mins and maxes of the inputs
// are produced, so the fixpoint is exact.
std::vector<double> reconstruct_offsets(const std::vector<double>& marker,
                                        const std::vector<double>& mask, int width, int height,
                                        const std::vector<Offset>& offsets) {
    if (marker.size() != mask.size() ||
        marker.size() != static_cast<std::size_t>(width) * height) {
        throw InvalidInput("reconstruction inputs must share the grid size");
    }
    std::vector<Offset> forward, backward;
    for (const auto& o : offsets) {
        if (o.first < 0 || (o.first == 0 && o.second < 0)) {
            forward.push_back(o);
        } else {
            backward.push_back(o);
        }
    }

    std::vector<double> out = marker;
    auto idx = [width](int row, int col) {
        return static_cast<std::size_t>(row) * width + col;
    };
    auto in_bounds = [&](int row, int col) {
        return row >= 0 && row < height && col >= 0 && col < width;
    };

    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            double v = out[idx(row, col)];
            for (const auto& [dr, dc] : forward) {
                if (in_bounds(row + dr, col + dc)) {
                    v = std::max(v, out[idx(row + dr, col + dc)]);
                }
            }
            out[idx(row, col)] = std::min(v, mask[idx(row, col)]);
        }
    }

    std::deque<std::pair<int, int>> fifo;
    for (int row = height - 1; row >= 0; --row) {
        for (int col = width - 1; col >= 0; --col) {
            double v = out[idx(row, col)];
            for (const auto& [dr, dc] : backward) {
                if (in_bounds(row + dr, col + dc)) {
                    v = std::max(v, out[idx(row + dr, col + dc)]);
                }
            }
            out[idx(row, col)] = std::min(v, mask[idx(row, col)]);
            for (const auto& [dr, dc] : backward) {
                const int r = row + dr, c = col + dc;
                if (in_bounds(r, c) && out[idx(r, c)] < out[idx(row, col)] &&
                    out[idx(r, c)] < mask[idx(r, c)]) {
                    fifo.push_back({row, col});
                    break;
                }
            }
        }
    }

    while (!fifo.empty()) {
        const auto [row, col] = fifo.front();
        fifo.pop_front();
        const double v = out[idx(row, col)];
        for (const auto& [dr, dc] : offsets) {
            const int r = row + dr, c = col + dc;
            if (!in_bounds(r, c)) continue;
            if (out[idx(r, c)] < v && mask[idx(r, c)] != out[idx(r, c)]) {
                out[idx(r, c)] = std::min(v, mask[idx(r, c)]);
                fifo.push_back({r, c});
            }
        }
    }
    return out;
}

}  // namespace

void CorrectionConfig::validate() const {
    if (!(h > 0.0 && h < 1.0)) {
        throw InvalidInput("correction h must lie in (0,1)");
    }
    if (neighborhood < 3 || neighborhood % 2 == 0) {
        throw InvalidInput("correction neighborhood must be odd and >= 3");
    }
    if (max_shift_distance < 0.0) {
        throw InvalidInput("max_shift_distance must be >= 0");
    }
    if (connectivity != 4 && connectivity != 8) {
        throw InvalidInput("connectivity must be 4 or 8");
    }
}

std::vector<double> reconstruct_by_dilation(const std::vector<double>& marker,
                                            const std::vector<double>& mask, int width,
                                            int height, int connectivity) {
    if (connectivity != 4 && connectivity != 8) {
        throw InvalidInput("connectivity must be 4 or 8");
    }
    return reconstruct_offsets(marker, mask, width, height, neighbor_offsets(connectivity, 3));
}

std::vector<PixelCoord> detect_h_maxima(const BandPlane& band, int width, int height, double h,
                                        int connectivity, int neighborhood) {
    if (!(h > 0.0 && h < 1.0)) {
        throw InvalidInput("h must lie in (0,1)");
    }
    if (connectivity != 4 && connectivity != 8) {
        throw InvalidInput("connectivity must be 4 or 8");
    }
    if (band.values.size() != static_cast<std::size_t>(width) * height) {
        throw InvalidInput("band size does not match grid dimensions");
    }
    const auto offsets = neighbor_offsets(connectivity, neighborhood);

    std::vector<double> marker(band.values.size());
    for (std::size_t i = 0; i < marker.size(); ++i) {
        marker[i] = band.values[i] - h;
    }
    const std::vector<double> rec =
        reconstruct_offsets(marker, band.values, width, height, offsets);

    // Regional maxima of the reconstruction: flood each equal-valued plateau
    // and keep it when every bordering pixel is strictly smaller. A plateau
    // spanning the whole image has nothing to dominate and yields no maxima
    // (constant bands produce no peaks).
    auto idx = [width](int row, int col) {
        return static_cast<std::size_t>(row) * width + col;
    };
    std::vector<std::uint8_t> visited(rec.size(), 0);
    std::vector<PixelCoord> peaks;
    std::vector<PixelCoord> plateau;
    std::deque<PixelCoord> queue;

    for (int row = 0; row < height; ++row) {
        for (int col = 0; col < width; ++col) {
            if (visited[idx(row, col)]) continue;
            const double level = rec[idx(row, col)];
            plateau.clear();
            queue.clear();
            queue.push_back({col, row});
            visited[idx(row, col)] = 1;
            bool is_max = true;
            bool has_border = false;
            while (!queue.empty()) {
                const PixelCoord p = queue.front();
                queue.pop_front();
                plateau.push_back(p);
                for (const auto& [dr, dc] : offsets) {
                    const int r = p.row + dr, c = p.col + dc;
                    if (r < 0 || r >= height || c < 0 || c >= width) continue;
                    const double v = rec[idx(r, c)];
                    if (v == level) {
                        if (!visited[idx(r, c)]) {
                            visited[idx(r, c)] = 1;
                            queue.push_back({c, r});
                        }
                    } else {
                        has_border = true;
                        if (v > level) is_max = false;
                    }
                }
            }
            if (is_max && has_border) {
                peaks.insert(peaks.end(), plateau.begin(), plateau.end());
            }
        }
    }
    std::sort(peaks.begin(), peaks.end());
    return peaks;
}

PeakIndex build_peak_index(const RasterGrid& grid, const CorrectionConfig& cfg) {
    cfg.validate();
    if (grid.bands.size() < 3) {
        throw InvalidInput("peak index needs at least 3 bands");
    }
    std::array<KdTree2, 3> trees;
    for (int b = 0; b < 3; ++b) {
        int band_idx = grid.band_index(band_name(static_cast<Band>(b)));
        if (band_idx < 0) band_idx = b;  // fall back to stored order
        const BandPlane normalized = normalize_band(grid.bands[band_idx]);
        trees[b] = KdTree2(detect_h_maxima(normalized, grid.width, grid.height, cfg.h,
                                           cfg.connectivity, cfg.neighborhood));
    }
    return PeakIndex(std::move(trees));
}

std::vector<EchoTrajectory> correct_keypoints(const std::vector<EchoTrajectory>& echoes,
                                              const PeakIndex& index,
                                              const CorrectionConfig& cfg) {
    cfg.validate();
    const double max_shift2 = cfg.max_shift_distance * cfg.max_shift_distance;
    std::vector<EchoTrajectory> out;
    out.reserve(echoes.size());
    for (const auto& echo : echoes) {
        EchoTrajectory corrected = echo;
        for (auto& kp : corrected.keypoints) {
            const auto hit = index.tree(kp.band).nearest(kp.col, kp.row);
            if (hit && hit->dist2 < max_shift2) {
                kp.col = hit->point.col;
                kp.row = hit->point.row;
            }
        }
        corrected.bbox = bbox_from_keypoints(corrected.keypoints);
        out.push_back(std::move(corrected));
    }
    return out;
}

}  // namespace echovel
