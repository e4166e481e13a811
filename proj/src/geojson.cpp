#include "echovel/geojson.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"

namespace echovel {

using nlohmann::json;

namespace {

Polyline coords_to_polyline(const json& coords) {
    Polyline line;
    for (const auto& pt : coords) {
        if (!pt.is_array() || pt.size() < 2) {
            throw InvalidInput("GeoJSON coordinate must hold at least [x, y]");
        }
        line.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    return line;
}

void collect_lines(const json& geometry, std::vector<Polyline>& out) {
    const std::string type = geometry.at("type").get<std::string>();
    if (type == "LineString") {
        out.push_back(coords_to_polyline(geometry.at("coordinates")));
    } else if (type == "MultiLineString") {
        for (const auto& part : geometry.at("coordinates")) {
            out.push_back(coords_to_polyline(part));
        }
    } else if (type == "Feature") {
        collect_lines(geometry.at("geometry"), out);
    } else if (type == "FeatureCollection") {
        for (const auto& f : geometry.at("features")) {
            collect_lines(f, out);
        }
    } else if (type == "GeometryCollection") {
        for (const auto& g : geometry.at("geometries")) {
            collect_lines(g, out);
        }
    } else {
        throw InvalidInput("unsupported GeoJSON geometry for centerlines: " + type);
    }
}

}  // namespace

std::vector<Polyline> centerlines_from_geojson(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("GeoJSON parse error: ") + e.what());
    }
    std::vector<Polyline> out;
    try {
        collect_lines(j, out);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("GeoJSON schema error: ") + e.what());
    }
    return out;
}

std::vector<GpsTrack> gps_tracks_from_geojson(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("GeoJSON parse error: ") + e.what());
    }
    std::map<std::int64_t, GpsTrack> by_id;
    try {
        if (j.at("type").get<std::string>() != "FeatureCollection") {
            throw InvalidInput("GPS tracks must be a GeoJSON FeatureCollection");
        }
        for (const auto& f : j.at("features")) {
            const auto& geometry = f.at("geometry");
            if (geometry.at("type").get<std::string>() != "Point") {
                throw InvalidInput("GPS track features must be Points");
            }
            const auto& coords = geometry.at("coordinates");
            const auto& props = f.at("properties");
            GpsPoint p;
            p.x = coords[0].get<double>();
            p.y = coords[1].get<double>();
            p.time = parse_iso8601(props.at("timestamp").get<std::string>());
            p.speed_kmh = props.at("speed_kmh").get<double>();
            const std::int64_t id = props.at("track_id").get<std::int64_t>();
            auto& track = by_id[id];
            track.track_id = id;
            track.points.push_back(p);
        }
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("GPS GeoJSON schema error: ") + e.what());
    }
    std::vector<GpsTrack> out;
    for (auto& [id, track] : by_id) {
        std::sort(track.points.begin(), track.points.end(),
                  [](const GpsPoint& a, const GpsPoint& b) {
                      return a.time.epoch_s < b.time.epoch_s;
                  });
        track.validate();
        out.push_back(std::move(track));
    }
    return out;
}

}  // namespace echovel
