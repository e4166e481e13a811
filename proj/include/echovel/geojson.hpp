#pragma once

#include <string>
#include <vector>

#include "echovel/raster.hpp"
#include "echovel/validation.hpp"

namespace echovel {

// Road centerlines from GeoJSON LineString/MultiLineString geometry (bare,
// as a Feature, or in a FeatureCollection). Coordinates must already be in
// the projected metre CRS of the imagery.
std::vector<Polyline> centerlines_from_geojson(const std::string& text);

// GPS tracks from a GeoJSON FeatureCollection of Point features with
// properties track_id, timestamp (ISO 8601) and speed_kmh. Coordinates in
// the projected metre CRS of the imagery.
std::vector<GpsTrack> gps_tracks_from_geojson(const std::string& text);

}  // namespace echovel
