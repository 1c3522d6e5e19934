#include "cinetrack/image_io.hpp"

#include <zlib.h>

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cinetrack {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(path, "write failed");
}

// skips whitespace and '#' comments between PGM header tokens
std::string next_token(const std::vector<std::uint8_t>& b, std::size_t& pos) {
    while (pos < b.size()) {
        if (std::isspace(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    std::string tok;
    while (pos < b.size() && !std::isspace(b[pos])) tok.push_back(static_cast<char>(b[pos++]));
    return tok;
}

}  // namespace

Image8 read_pgm(const std::string& path) {
    const auto bytes = read_file(path);
    std::size_t pos = 0;
    if (next_token(bytes, pos) != "P5") fail(path, "not a binary PGM (P5)");
    Image8 img;
    try {
        img.width = std::stoi(next_token(bytes, pos));
        img.height = std::stoi(next_token(bytes, pos));
        const int maxval = std::stoi(next_token(bytes, pos));
        if (maxval != 255) fail(path, "only maxval 255 supported");
    } catch (const std::logic_error&) {
        fail(path, "malformed PGM header");
    }
    if (img.width <= 0 || img.height <= 0) fail(path, "bad dimensions");
    ++pos;  // single whitespace after maxval
    const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
    if (bytes.size() < pos + n) fail(path, "truncated pixel data");
    img.pixels.assign(bytes.begin() + pos, bytes.begin() + pos + n);
    return img;
}

void write_pgm(const std::string& path, const Image8& img) {
    std::vector<std::uint8_t> out;
    const std::string header =
        "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    write_file(path, out);
}

namespace {

constexpr std::array<std::uint8_t, 8> kPngSig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

void put_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    v.push_back(static_cast<std::uint8_t>(x >> 24));
    v.push_back(static_cast<std::uint8_t>(x >> 16));
    v.push_back(static_cast<std::uint8_t>(x >> 8));
    v.push_back(static_cast<std::uint8_t>(x));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& payload) {
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const uLong crc = crc32(crc32(0L, nullptr, 0), out.data() + crc_start,
                            static_cast<uInt>(out.size() - crc_start));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

void write_png_gray8(const std::string& path, const Image8& img) {
    std::vector<std::uint8_t> out(kPngSig.begin(), kPngSig.end());

    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(img.width));
    put_u32(ihdr, static_cast<std::uint32_t>(img.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(0);  // color type: grayscale
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter method
    ihdr.push_back(0);  // no interlace
    append_chunk(out, "IHDR", ihdr);

    // raw scanlines, filter type 0 per row
    std::vector<std::uint8_t> raw;
    raw.reserve(static_cast<std::size_t>(img.height) * (img.width + 1));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = img.pixels.data() + static_cast<std::size_t>(y) * img.width;
        raw.insert(raw.end(), row, row + img.width);
    }
    uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> comp(comp_len);
    if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        fail(path, "deflate failed");
    comp.resize(comp_len);
    append_chunk(out, "IDAT", comp);
    append_chunk(out, "IEND", {});
    write_file(path, out);
}

Image8 read_png_gray8(const std::string& path) {
    const auto bytes = read_file(path);
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kPngSig.data(), 8) != 0)
        fail(path, "not a PNG");

    Image8 img;
    std::vector<std::uint8_t> idat;
    std::size_t pos = 8;
    bool saw_ihdr = false;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t len = get_u32(&bytes[pos]);
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        if (pos + 12 + len > bytes.size()) fail(path, "truncated chunk");
        const std::uint8_t* payload = &bytes[pos + 8];
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) fail(path, "bad IHDR");
            img.width = static_cast<int>(get_u32(payload));
            img.height = static_cast<int>(get_u32(payload + 4));
            if (payload[8] != 8 || payload[9] != 0)
                fail(path, "only 8-bit grayscale PNG supported");
            if (payload[12] != 0) fail(path, "interlaced PNG not supported");
            saw_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            break;
        }
        pos += 12 + len;
    }
    if (!saw_ihdr || img.width <= 0 || img.height <= 0) fail(path, "missing IHDR");
    if (idat.empty()) fail(path, "missing IDAT");

    const std::size_t stride = static_cast<std::size_t>(img.width) + 1;
    std::vector<std::uint8_t> raw(stride * img.height);
    uLongf raw_len = static_cast<uLongf>(raw.size());
    if (uncompress(raw.data(), &raw_len, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
        raw_len != raw.size())
        fail(path, "inflate failed");

    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    std::vector<std::uint8_t> prev(img.width, 0);
    for (int y = 0; y < img.height; ++y) {
        const std::uint8_t filter = raw[y * stride];
        const std::uint8_t* src = &raw[y * stride + 1];
        std::uint8_t* dst = &img.pixels[static_cast<std::size_t>(y) * img.width];
        for (int x = 0; x < img.width; ++x) {
            const int a = x > 0 ? dst[x - 1] : 0;
            const int b = prev[x];
            const int c = x > 0 ? prev[x - 1] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += b; break;
                case 3: v += (a + b) / 2; break;
                case 4: v += paeth(a, b, c); break;
                default: fail(path, "unknown PNG filter");
            }
            dst[x] = static_cast<std::uint8_t>(v & 0xff);
        }
        std::memcpy(prev.data(), dst, img.width);
    }
    return img;
}

Image8 read_gray8(const std::string& path) {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".png") == 0)
        return read_png_gray8(path);
    return read_pgm(path);
}

Image8 to_image8(const Raster& r) {
    Image8 img;
    img.width = r.width;
    img.height = r.height;
    img.pixels.resize(r.data.size());
    for (std::size_t i = 0; i < r.data.size(); ++i) {
        double v = r.data[i];
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        img.pixels[i] = static_cast<std::uint8_t>(v * 255.0 + 0.5);
    }
    return img;
}

Raster to_raster(const Image8& img) {
    Raster r(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) r.data[i] = img.pixels[i] / 255.0;
    return r;
}

}  // namespace cinetrack
