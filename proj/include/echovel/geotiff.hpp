#pragma once

#include <string>

#include "echovel/raster.hpp"

namespace echovel {

// Minimal GeoTIFF support: uncompressed strip-organized baseline TIFF with
// the GeoTIFF affine tags. The writer emits float32 planar bands plus
// ModelTransformationTag; the reader additionally accepts uint8/uint16
// samples, chunky layout and ModelPixelScale/ModelTiepoint. This covers
// round-tripping our own files and plain exports from common GIS tools;
// compressed or tiled TIFFs are rejected with a clear error.
RasterGrid read_geotiff(const std::string& path);
void write_geotiff(const RasterGrid& grid, const std::string& path);

}  // namespace echovel
