#include "echovel/echoes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace echovel {

using nlohmann::json;

const char* band_name(Band b) {
    switch (b) {
        case Band::blue:
            return "blue";
        case Band::red:
            return "red";
        case Band::green:
            return "green";
    }
    return "?";
}

const ImageInfo* EchoDataset::find_image(std::int64_t image_id) const {
    for (const auto& im : images) {
        if (im.id == image_id) return &im;
    }
    return nullptr;
}

BBox bbox_from_keypoints(const std::array<Keypoint, 3>& kps) {
    double x0 = kps[0].col, x1 = kps[0].col;
    double y0 = kps[0].row, y1 = kps[0].row;
    for (const auto& k : kps) {
        x0 = std::min(x0, k.col);
        x1 = std::max(x1, k.col);
        y0 = std::min(y0, k.row);
        y1 = std::max(y1, k.row);
    }
    return {x0 - 1.0, y0 - 1.0, (x1 - x0) + 2.0, (y1 - y0) + 2.0};
}

double trajectory_length_px(const EchoTrajectory& e) {
    const Keypoint& b = e.kp(Band::blue);
    const Keypoint& r = e.kp(Band::red);
    const Keypoint& g = e.kp(Band::green);
    return std::hypot(b.col - r.col, b.row - r.row) + std::hypot(r.col - g.col, r.row - g.row);
}

namespace {

void check_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw InvalidInput(what + " is not finite");
}

void validate_entry(const DatasetEntry& a) {
    const std::string where = "annotation " + std::to_string(a.echo.id);
    for (const auto& k : a.echo.keypoints) {
        check_finite(k.col, where + " keypoint col");
        check_finite(k.row, where + " keypoint row");
    }
    if (a.echo.keypoints[0].band != Band::blue || a.echo.keypoints[1].band != Band::red ||
        a.echo.keypoints[2].band != Band::green) {
        throw InvalidInput(where + ": keypoints must be ordered blue,red,green");
    }
    if (a.echo.bbox.w < 0.0 || a.echo.bbox.h < 0.0) {
        throw InvalidInput(where + ": bbox width/height must be >= 0");
    }
    if (!(a.echo.score >= 0.0 && a.echo.score <= 1.0)) {
        throw InvalidInput(where + ": score must lie in [0,1]");
    }
}

void validate_dataset(const EchoDataset& d) {
    std::set<std::int64_t> image_ids;
    for (const auto& im : d.images) {
        if (!image_ids.insert(im.id).second) {
            throw InvalidInput("duplicate image id " + std::to_string(im.id));
        }
        if (im.width <= 0 || im.height <= 0) {
            throw InvalidInput("image " + std::to_string(im.id) + ": non-positive dimensions");
        }
    }
    std::set<std::int64_t> ann_ids;
    for (const auto& a : d.annotations) {
        if (!ann_ids.insert(a.echo.id).second) {
            throw InvalidInput("duplicate annotation id " + std::to_string(a.echo.id));
        }
        if (!image_ids.count(a.image_id)) {
            throw InvalidInput("annotation " + std::to_string(a.echo.id) +
                               " references missing image_id " + std::to_string(a.image_id));
        }
        validate_entry(a);
        // In-bounds check against the owning image entry.
        const ImageInfo* im = d.find_image(a.image_id);
        for (const auto& k : a.echo.keypoints) {
            if (k.col < 0.0 || k.col > im->width - 1 || k.row < 0.0 || k.row > im->height - 1) {
                throw InvalidInput("annotation " + std::to_string(a.echo.id) + ": " +
                                   band_name(k.band) + " keypoint outside image bounds");
            }
        }
    }
}

json transform_to_json(const AffineTransform& t) {
    return json::array({t.a, t.b, t.c, t.d, t.e, t.f});
}

}  // namespace

EchoDataset dataset_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("dataset parse error: ") + e.what());
    }

    EchoDataset d;
    try {
        for (const auto& im : j.at("images")) {
            ImageInfo info;
            info.id = im.at("id").get<std::int64_t>();
            info.file = im.at("file").get<std::string>();
            info.width = im.at("width").get<int>();
            info.height = im.at("height").get<int>();
            const auto& gt = im.at("geotransform");
            if (!gt.is_array() || gt.size() != 6) {
                throw InvalidInput("image " + std::to_string(info.id) +
                                   ": geotransform must hold 6 numbers");
            }
            info.geotransform = {gt[0].get<double>(), gt[1].get<double>(), gt[2].get<double>(),
                                 gt[3].get<double>(), gt[4].get<double>(), gt[5].get<double>()};
            if (im.contains("timestamp") && !im.at("timestamp").is_null()) {
                info.timestamp = im.at("timestamp").get<std::string>();
            }
            d.images.push_back(std::move(info));
        }
        for (const auto& an : j.at("annotations")) {
            DatasetEntry entry;
            entry.echo.id = an.at("id").get<std::int64_t>();
            entry.image_id = an.at("image_id").get<std::int64_t>();
            const auto& kps = an.at("keypoints");
            if (!kps.is_array() || kps.size() != 9) {
                throw InvalidInput("annotation " + std::to_string(entry.echo.id) +
                                   ": keypoints must hold 9 values (3 per band), got " +
                                   std::to_string(kps.size()));
            }
            for (int b = 0; b < 3; ++b) {
                entry.echo.keypoints[b].col = kps[3 * b].get<double>();
                entry.echo.keypoints[b].row = kps[3 * b + 1].get<double>();
                entry.echo.keypoints[b].band = static_cast<Band>(b);
            }
            if (an.contains("bbox") && !an.at("bbox").is_null()) {
                const auto& bb = an.at("bbox");
                if (!bb.is_array() || bb.size() != 4) {
                    throw InvalidInput("annotation " + std::to_string(entry.echo.id) +
                                       ": bbox must hold 4 numbers");
                }
                entry.echo.bbox = {bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                                   bb[3].get<double>()};
            } else {
                entry.echo.bbox = bbox_from_keypoints(entry.echo.keypoints);
            }
            entry.echo.score = an.value("score", 1.0);
            d.annotations.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("dataset schema error: ") + e.what());
    }

    validate_dataset(d);
    return d;
}

EchoDataset parse_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return dataset_from_json(ss.str());
}

std::string dataset_to_json(const EchoDataset& d) {
    EchoDataset sorted = d;
    std::sort(sorted.images.begin(), sorted.images.end(),
              [](const ImageInfo& a, const ImageInfo& b) { return a.id < b.id; });
    std::sort(sorted.annotations.begin(), sorted.annotations.end(),
              [](const DatasetEntry& a, const DatasetEntry& b) { return a.echo.id < b.echo.id; });

    json j;
    j["images"] = json::array();
    for (const auto& im : sorted.images) {
        json e;
        e["id"] = im.id;
        e["file"] = im.file;
        e["width"] = im.width;
        e["height"] = im.height;
        e["geotransform"] = transform_to_json(im.geotransform);
        e["timestamp"] = im.timestamp ? json(*im.timestamp) : json(nullptr);
        j["images"].push_back(std::move(e));
    }
    j["annotations"] = json::array();
    for (const auto& a : sorted.annotations) {
        json e;
        e["id"] = a.echo.id;
        e["image_id"] = a.image_id;
        json kps = json::array();
        for (const auto& k : a.echo.keypoints) {
            kps.push_back(k.col);
            kps.push_back(k.row);
            kps.push_back(2.0);  // all keypoints visible
        }
        e["keypoints"] = std::move(kps);
        e["bbox"] = json::array({a.echo.bbox.x, a.echo.bbox.y, a.echo.bbox.w, a.echo.bbox.h});
        e["score"] = a.echo.score;
        j["annotations"].push_back(std::move(e));
    }
    return j.dump();
}

void save_dataset(const EchoDataset& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << dataset_to_json(d);
    if (!out) throw IoError("write failed: " + path);
}

std::vector<RasterViolation> validate_against_raster(const EchoDataset& d, const RasterGrid& g) {
    std::vector<RasterViolation> out;
    for (const auto& im : d.images) {
        if (im.width != g.width || im.height != g.height) {
            out.push_back({im.id, "image " + std::to_string(im.id) + " declares " +
                                      std::to_string(im.width) + "x" + std::to_string(im.height) +
                                      " but grid is " + std::to_string(g.width) + "x" +
                                      std::to_string(g.height)});
        }
    }
    for (const auto& a : d.annotations) {
        for (const auto& k : a.echo.keypoints) {
            if (k.col < 0.0 || k.col > g.width - 1 || k.row < 0.0 || k.row > g.height - 1) {
                std::ostringstream msg;
                msg << "annotation " << a.echo.id << ": " << band_name(k.band) << " keypoint ("
                    << k.col << ", " << k.row << ") outside grid bounds";
                out.push_back({a.echo.id, msg.str()});
            }
        }
    }
    return out;
}

}  // namespace echovel
