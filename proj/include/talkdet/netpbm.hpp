#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "talkdet/error.hpp"
#include "talkdet/image.hpp"

// Binary PGM (P5) and PPM (P6) readers/writers. 8-bit for frames,
// 16-bit PGM (big-endian sample order, per netpbm) for debug dumps.

namespace talkdet::netpbm {

namespace detail {

inline int next_token_int(std::istream& in, const std::string& path) {
    // Skips whitespace and '#' comments between header tokens.
    for (;;) {
        int c = in.peek();
        if (c == EOF) throw ParseError("truncated PNM header in " + path);
        if (c == '#') {
            std::string line;
            std::getline(in, line);
            continue;
        }
        if (std::isspace(c)) {
            in.get();
            continue;
        }
        break;
    }
    long long v = 0;
    if (!(in >> v)) throw ParseError("bad PNM header token in " + path);
    return static_cast<int>(v);
}

inline void read_header(std::istream& in, const std::string& path, const char* magic, int& w, int& h, int& maxval) {
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != magic[0] || m1 != magic[1])
        throw ParseError("expected " + std::string(magic) + " magic in " + path);
    w = next_token_int(in, path);
    h = next_token_int(in, path);
    maxval = next_token_int(in, path);
    in.get(); // single whitespace before raster
    if (w <= 0 || h <= 0) throw ParseError("non-positive PNM dimensions in " + path);
}

} // namespace detail

struct PnmInfo {
    char magic = '5'; // '5' gray, '6' rgb
    int width = 0;
    int height = 0;
    int maxval = 255;
};

inline PnmInfo peek_info(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6')) throw ParseError("not a binary PGM/PPM file: " + path);
    PnmInfo info;
    info.magic = m1;
    info.width = detail::next_token_int(in, path);
    info.height = detail::next_token_int(in, path);
    info.maxval = detail::next_token_int(in, path);
    return info;
}

inline GrayFrame read_pgm8(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    int w, h, maxval;
    detail::read_header(in, path, "P5", w, h, maxval);
    if (maxval != 255) throw ParseError("expected maxval 255 in " + path);
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw CorruptError("truncated raster in " + path);
    GrayFrame img(w, h);
    for (size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] / 255.0;
    return img;
}

inline RgbFrame read_ppm8(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    int w, h, maxval;
    detail::read_header(in, path, "P6", w, h, maxval);
    if (maxval != 255) throw ParseError("expected maxval 255 in " + path);
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 3);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw CorruptError("truncated raster in " + path);
    RgbFrame img(w, h);
    for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = {raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]};
    return img;
}

inline void write_pgm8(const GrayFrame& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> raw(img.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        double v = std::clamp(img.data[i], 0.0, 1.0);
        raw[i] = static_cast<uint8_t>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

inline void write_ppm8(const RgbFrame& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> raw(img.size() * 3);
    for (size_t i = 0; i < img.size(); ++i) {
        raw[3 * i] = img.data[i].r;
        raw[3 * i + 1] = img.data[i].g;
        raw[3 * i + 2] = img.data[i].b;
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

// 16-bit PGM, values already scaled to [0, 65535]. Big-endian raster.
inline void write_pgm16(const Image<uint16_t>& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "P5\n" << img.width << " " << img.height << "\n65535\n";
    std::vector<uint8_t> raw(img.size() * 2);
    for (size_t i = 0; i < img.size(); ++i) {
        raw[2 * i] = static_cast<uint8_t>(img.data[i] >> 8);
        raw[2 * i + 1] = static_cast<uint8_t>(img.data[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

inline Image<uint16_t> read_pgm16(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    int w, h, maxval;
    detail::read_header(in, path, "P5", w, h, maxval);
    if (maxval != 65535) throw ParseError("expected maxval 65535 in " + path);
    std::vector<uint8_t> raw(static_cast<size_t>(w) * h * 2);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw CorruptError("truncated raster in " + path);
    Image<uint16_t> img(w, h);
    for (size_t i = 0; i < img.size(); ++i)
        img.data[i] = static_cast<uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]);
    return img;
}

} // namespace talkdet::netpbm
