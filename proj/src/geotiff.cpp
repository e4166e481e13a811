#include "echovel/geotiff.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace echovel {

namespace {

// TIFF tag codes used here.
enum : std::uint16_t {
    kImageWidth = 256,
    kImageLength = 257,
    kBitsPerSample = 258,
    kCompression = 259,
    kPhotometric = 262,
    kImageDescription = 270,
    kStripOffsets = 273,
    kSamplesPerPixel = 277,
    kRowsPerStrip = 278,
    kStripByteCounts = 279,
    kPlanarConfig = 284,
    kSampleFormat = 339,
    kModelPixelScale = 33550,
    kModelTiepoint = 33922,
    kModelTransformation = 34264,
    kTileWidth = 322,
};

enum : std::uint16_t {
    kTypeByte = 1,
    kTypeAscii = 2,
    kTypeShort = 3,
    kTypeLong = 4,
    kTypeRational = 5,
    kTypeDouble = 12,
};

std::size_t type_size(std::uint16_t type) {
    switch (type) {
        case kTypeByte:
        case kTypeAscii:
            return 1;
        case kTypeShort:
            return 2;
        case kTypeLong:
            return 4;
        case kTypeRational:
            return 8;
        case kTypeDouble:
            return 8;
        default:
            return 0;
    }
}

struct TiffEntry {
    std::uint16_t type = 0;
    std::uint32_t count = 0;
    std::uint32_t value_or_offset = 0;   // raw field; inline when it fits
    std::size_t field_offset = 0;        // file offset of the value/offset field
};

class Reader {
public:
    explicit Reader(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        data_ = ss.str();
        if (data_.size() < 8) throw InvalidInput("not a TIFF file: " + path);
        if (data_[0] == 'I' && data_[1] == 'I') {
            swap_ = false;
        } else if (data_[0] == 'M' && data_[1] == 'M') {
            swap_ = true;
        } else {
            throw InvalidInput("not a TIFF file: " + path);
        }
        if (u16(2) != 42) throw InvalidInput("not a classic TIFF file: " + path);
        parse_ifd(u32(4));
    }

    bool has(std::uint16_t tag) const { return entries_.count(tag) != 0; }

    std::uint32_t scalar(std::uint16_t tag) const {
        auto v = longs(tag);
        if (v.empty()) throw InvalidInput("TIFF tag missing value");
        return v[0];
    }

    std::vector<std::uint32_t> longs(std::uint16_t tag) const {
        const TiffEntry& e = entry(tag);
        std::vector<std::uint32_t> out;
        out.reserve(e.count);
        const std::size_t esz = type_size(e.type);
        for (std::uint32_t i = 0; i < e.count; ++i) {
            const std::size_t off = value_offset(e) + i * esz;
            if (e.type == kTypeShort) {
                out.push_back(u16(off));
            } else if (e.type == kTypeLong) {
                out.push_back(u32(off));
            } else if (e.type == kTypeByte) {
                out.push_back(static_cast<std::uint8_t>(data_.at(off)));
            } else {
                throw InvalidInput("unexpected TIFF tag type for integer tag");
            }
        }
        return out;
    }

    std::vector<double> doubles(std::uint16_t tag) const {
        const TiffEntry& e = entry(tag);
        if (e.type != kTypeDouble) throw InvalidInput("expected DOUBLE TIFF tag");
        std::vector<double> out;
        out.reserve(e.count);
        for (std::uint32_t i = 0; i < e.count; ++i) {
            out.push_back(f64(value_offset(e) + i * 8));
        }
        return out;
    }

    std::string ascii(std::uint16_t tag) const {
        const TiffEntry& e = entry(tag);
        std::string s = data_.substr(value_offset(e), e.count);
        while (!s.empty() && s.back() == '\0') s.pop_back();
        return s;
    }

    const std::string& bytes() const { return data_; }
    bool swapped() const { return swap_; }

    std::uint16_t u16(std::size_t off) const {
        if (off + 2 > data_.size()) throw InvalidInput("truncated TIFF file");
        std::uint16_t v;
        std::memcpy(&v, data_.data() + off, 2);
        if (swap_) v = static_cast<std::uint16_t>((v >> 8) | (v << 8));
        return v;
    }

    std::uint32_t u32(std::size_t off) const {
        if (off + 4 > data_.size()) throw InvalidInput("truncated TIFF file");
        std::uint32_t v;
        std::memcpy(&v, data_.data() + off, 4);
        if (swap_) v = __builtin_bswap32(v);
        return v;
    }

    double f64(std::size_t off) const {
        if (off + 8 > data_.size()) throw InvalidInput("truncated TIFF file");
        std::uint64_t v;
        std::memcpy(&v, data_.data() + off, 8);
        if (swap_) v = __builtin_bswap64(v);
        double d;
        std::memcpy(&d, &v, 8);
        return d;
    }

private:
    void parse_ifd(std::size_t off) {
        const std::uint16_t n = u16(off);
        for (std::uint16_t i = 0; i < n; ++i) {
            const std::size_t eoff = off + 2 + static_cast<std::size_t>(i) * 12;
            const std::uint16_t tag = u16(eoff);
            TiffEntry e;
            e.type = u16(eoff + 2);
            e.count = u32(eoff + 4);
            e.value_or_offset = u32(eoff + 8);
            e.field_offset = eoff + 8;
            entries_[tag] = e;
        }
    }

    const TiffEntry& entry(std::uint16_t tag) const {
        auto it = entries_.find(tag);
        if (it == entries_.end()) throw InvalidInput("required TIFF tag missing");
        return it->second;
    }

    std::size_t value_offset(const TiffEntry& e) const {
        const std::size_t total = type_size(e.type) * e.count;
        // Values that fit in 4 bytes live in the entry field itself.
        return total <= 4 ? e.field_offset : e.value_or_offset;
    }

    std::string data_;
    bool swap_ = false;
    std::map<std::uint16_t, TiffEntry> entries_;
};

AffineTransform transform_from_tags(const Reader& r) {
    if (r.has(kModelTransformation)) {
        const auto m = r.doubles(kModelTransformation);
        if (m.size() != 16) throw InvalidInput("ModelTransformationTag must hold 16 doubles");
        AffineTransform t;
        t.b = m[0];
        t.c = m[1];
        t.a = m[3];
        t.e = m[4];
        t.f = m[5];
        t.d = m[7];
        return t;
    }
    if (r.has(kModelPixelScale) && r.has(kModelTiepoint)) {
        const auto scale = r.doubles(kModelPixelScale);
        const auto tie = r.doubles(kModelTiepoint);
        if (scale.size() < 2 || tie.size() < 6) {
            throw InvalidInput("malformed GeoTIFF scale/tiepoint tags");
        }
        AffineTransform t;
        t.b = scale[0];
        t.f = -scale[1];
        t.c = 0.0;
        t.e = 0.0;
        t.a = tie[3] - tie[0] * scale[0];
        t.d = tie[4] + tie[1] * scale[1];
        return t;
    }
    throw InvalidInput("GeoTIFF is missing geotransform tags");
}

}  // namespace

RasterGrid read_geotiff(const std::string& path) {
    Reader r(path);
    if (r.has(kTileWidth)) {
        throw InvalidInput("tiled TIFFs are not supported: " + path);
    }
    if (r.has(kCompression) && r.scalar(kCompression) != 1) {
        throw InvalidInput("compressed TIFFs are not supported: " + path);
    }

    RasterGrid grid;
    grid.width = static_cast<int>(r.scalar(kImageWidth));
    grid.height = static_cast<int>(r.scalar(kImageLength));
    const int spp = r.has(kSamplesPerPixel) ? static_cast<int>(r.scalar(kSamplesPerPixel)) : 1;
    const auto bits_v = r.longs(kBitsPerSample);
    for (auto b : bits_v) {
        if (b != bits_v[0]) throw InvalidInput("mixed per-band bit depths are not supported");
    }
    const std::uint32_t bits = bits_v[0];
    std::uint32_t sample_format = 1;
    if (r.has(kSampleFormat)) {
        sample_format = r.longs(kSampleFormat)[0];
    }
    if (!((sample_format == 1 && (bits == 8 || bits == 16)) ||
          (sample_format == 3 && bits == 32))) {
        throw InvalidInput("unsupported TIFF sample type (need uint8/uint16/float32)");
    }
    const int planar = r.has(kPlanarConfig) ? static_cast<int>(r.scalar(kPlanarConfig)) : 1;
    const auto strip_offsets = r.longs(kStripOffsets);
    const auto strip_counts = r.longs(kStripByteCounts);
    if (strip_offsets.size() != strip_counts.size()) {
        throw InvalidInput("mismatched strip offset/count tags");
    }
    const std::uint32_t rows_per_strip =
        r.has(kRowsPerStrip) ? r.scalar(kRowsPerStrip) : static_cast<std::uint32_t>(grid.height);

    // Concatenate strip payloads per plane, then demux samples.
    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t npx = static_cast<std::size_t>(grid.width) * grid.height;
    std::vector<std::vector<std::uint8_t>> planes;
    const std::string& raw = r.bytes();

    auto append_strip = [&](std::vector<std::uint8_t>& dst, std::uint32_t off, std::uint32_t len) {
        if (static_cast<std::size_t>(off) + len > raw.size()) {
            throw InvalidInput("TIFF strip extends past end of file");
        }
        dst.insert(dst.end(), raw.begin() + off, raw.begin() + off + len);
    };

    if (planar == 2) {
        const std::size_t strips_per_plane =
            (static_cast<std::size_t>(grid.height) + rows_per_strip - 1) / rows_per_strip;
        if (strip_offsets.size() != strips_per_plane * spp) {
            throw InvalidInput("unexpected strip count for planar TIFF");
        }
        planes.resize(spp);
        for (int b = 0; b < spp; ++b) {
            for (std::size_t s = 0; s < strips_per_plane; ++s) {
                const std::size_t i = b * strips_per_plane + s;
                append_strip(planes[b], strip_offsets[i], strip_counts[i]);
            }
            if (planes[b].size() != npx * bytes_per_sample) {
                throw InvalidInput("TIFF plane size mismatch");
            }
        }
    } else if (planar == 1) {
        std::vector<std::uint8_t> all;
        for (std::size_t i = 0; i < strip_offsets.size(); ++i) {
            append_strip(all, strip_offsets[i], strip_counts[i]);
        }
        if (all.size() != npx * spp * bytes_per_sample) {
            throw InvalidInput("TIFF data size mismatch");
        }
        planes.resize(spp);
        for (int b = 0; b < spp; ++b) planes[b].resize(npx * bytes_per_sample);
        for (std::size_t px = 0; px < npx; ++px) {
            for (int b = 0; b < spp; ++b) {
                std::memcpy(planes[b].data() + px * bytes_per_sample,
                            all.data() + (px * spp + b) * bytes_per_sample, bytes_per_sample);
            }
        }
    } else {
        throw InvalidInput("unsupported TIFF planar configuration");
    }

    const bool swap = r.swapped();
    for (int b = 0; b < spp; ++b) {
        BandPlane plane;
        plane.values.resize(npx);
        const std::uint8_t* src = planes[b].data();
        for (std::size_t i = 0; i < npx; ++i) {
            if (bits == 8) {
                plane.values[i] = src[i];
            } else if (bits == 16) {
                std::uint16_t v;
                std::memcpy(&v, src + i * 2, 2);
                if (swap) v = static_cast<std::uint16_t>((v >> 8) | (v << 8));
                plane.values[i] = v;
            } else {
                std::uint32_t v;
                std::memcpy(&v, src + i * 4, 4);
                if (swap) v = __builtin_bswap32(v);
                float f;
                std::memcpy(&f, &v, 4);
                plane.values[i] = f;
            }
        }
        grid.bands.push_back(std::move(plane));
    }

    if (r.has(kImageDescription)) {
        std::stringstream ss(r.ascii(kImageDescription));
        std::string item;
        std::vector<std::string> labels;
        while (std::getline(ss, item, ',')) labels.push_back(item);
        if (static_cast<int>(labels.size()) == spp) grid.band_labels = labels;
    }
    if (grid.band_labels.empty()) {
        static const char* kDefault[3] = {"blue", "red", "green"};
        for (int b = 0; b < spp; ++b) {
            grid.band_labels.push_back(b < 3 ? kDefault[b] : "band" + std::to_string(b + 1));
        }
    }

    grid.geotransform = transform_from_tags(r);
    return grid;
}

namespace {

class Writer {
public:
    void u16(std::uint16_t v) { append(&v, 2); }
    void u32(std::uint32_t v) { append(&v, 4); }
    void f32(float v) { append(&v, 4); }
    void f64(double v) { append(&v, 8); }
    void raw(const void* p, std::size_t n) { append(p, n); }
    std::size_t pos() const { return out_.size(); }
    void patch_u32(std::size_t off, std::uint32_t v) { std::memcpy(out_.data() + off, &v, 4); }
    const std::vector<char>& buffer() const { return out_; }

private:
    void append(const void* p, std::size_t n) {
        const char* c = static_cast<const char*>(p);
        out_.insert(out_.end(), c, c + n);
    }
    std::vector<char> out_;
};

struct PendingTag {
    std::uint16_t tag;
    std::uint16_t type;
    std::uint32_t count;
    std::vector<std::uint8_t> payload;  // raw little-endian element bytes
};

void add_shorts(std::vector<PendingTag>& tags, std::uint16_t tag,
                const std::vector<std::uint16_t>& vals) {
    PendingTag p{tag, kTypeShort, static_cast<std::uint32_t>(vals.size()), {}};
    for (auto v : vals) {
        p.payload.push_back(static_cast<std::uint8_t>(v & 0xff));
        p.payload.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    tags.push_back(std::move(p));
}

void add_longs(std::vector<PendingTag>& tags, std::uint16_t tag,
               const std::vector<std::uint32_t>& vals) {
    PendingTag p{tag, kTypeLong, static_cast<std::uint32_t>(vals.size()), {}};
    for (auto v : vals) {
        for (int i = 0; i < 4; ++i) p.payload.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    tags.push_back(std::move(p));
}

void add_doubles(std::vector<PendingTag>& tags, std::uint16_t tag,
                 const std::vector<double>& vals) {
    PendingTag p{tag, kTypeDouble, static_cast<std::uint32_t>(vals.size()), {}};
    for (double v : vals) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        for (int i = 0; i < 8; ++i) p.payload.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    tags.push_back(std::move(p));
}

void add_ascii(std::vector<PendingTag>& tags, std::uint16_t tag, const std::string& s) {
    PendingTag p{tag, kTypeAscii, static_cast<std::uint32_t>(s.size() + 1), {}};
    p.payload.assign(s.begin(), s.end());
    p.payload.push_back(0);
    tags.push_back(std::move(p));
}

}  // namespace

void write_geotiff(const RasterGrid& grid, const std::string& path) {
    const int spp = static_cast<int>(grid.bands.size());
    const std::size_t npx = grid.pixel_count();
    Writer w;
    w.u16(0x4949);  // 'II' little-endian
    w.u16(42);
    const std::size_t ifd_offset_pos = w.pos();
    w.u32(0);  // patched below

    // Band planes, one strip each, float32.
    std::vector<std::uint32_t> strip_offsets, strip_counts;
    for (const auto& band : grid.bands) {
        strip_offsets.push_back(static_cast<std::uint32_t>(w.pos()));
        strip_counts.push_back(static_cast<std::uint32_t>(npx * 4));
        for (double v : band.values) w.f32(static_cast<float>(v));
    }

    std::string description;
    for (std::size_t i = 0; i < grid.band_labels.size(); ++i) {
        if (i) description += ',';
        description += grid.band_labels[i];
    }
    const AffineTransform& t = grid.geotransform;
    const std::vector<double> model{t.b, t.c, 0, t.a, t.e, t.f, 0, t.d, 0, 0, 0, 0, 0, 0, 0, 1};

    std::vector<PendingTag> tags;
    add_longs(tags, kImageWidth, {static_cast<std::uint32_t>(grid.width)});
    add_longs(tags, kImageLength, {static_cast<std::uint32_t>(grid.height)});
    add_shorts(tags, kBitsPerSample, std::vector<std::uint16_t>(spp, 32));
    add_shorts(tags, kCompression, {1});
    add_shorts(tags, kPhotometric, {1});
    add_ascii(tags, kImageDescription, description);
    add_longs(tags, kStripOffsets, strip_offsets);
    add_shorts(tags, kSamplesPerPixel, {static_cast<std::uint16_t>(spp)});
    add_longs(tags, kRowsPerStrip, {static_cast<std::uint32_t>(grid.height)});
    add_longs(tags, kStripByteCounts, strip_counts);
    add_shorts(tags, kPlanarConfig, {2});
    add_shorts(tags, kSampleFormat, std::vector<std::uint16_t>(spp, 3));
    add_doubles(tags, kModelTransformation, model);

    // External payloads (> 4 bytes) come before the IFD so their offsets are
    // known when entries are emitted.
    std::vector<std::uint32_t> payload_offsets(tags.size(), 0);
    for (std::size_t i = 0; i < tags.size(); ++i) {
        if (tags[i].payload.size() > 4) {
            if (w.pos() % 2) w.raw("\0", 1);
            payload_offsets[i] = static_cast<std::uint32_t>(w.pos());
            w.raw(tags[i].payload.data(), tags[i].payload.size());
        }
    }

    if (w.pos() % 2) w.raw("\0", 1);
    w.patch_u32(ifd_offset_pos, static_cast<std::uint32_t>(w.pos()));
    w.u16(static_cast<std::uint16_t>(tags.size()));
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const auto& p = tags[i];
        w.u16(p.tag);
        w.u16(p.type);
        w.u32(p.count);
        if (p.payload.size() > 4) {
            w.u32(payload_offsets[i]);
        } else {
            std::uint8_t inline_bytes[4] = {0, 0, 0, 0};
            std::memcpy(inline_bytes, p.payload.data(), p.payload.size());
            w.raw(inline_bytes, 4);
        }
    }
    w.u32(0);  // no next IFD

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace echovel
