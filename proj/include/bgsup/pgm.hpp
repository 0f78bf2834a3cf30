#pragma once

// Binary portable graymap (P5) reading and writing. Samples wider than one
// byte (maxval > 255) are stored big-endian, two bytes per sample.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "bgsup/error.hpp"

namespace bgsup {

struct GrayImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::uint32_t maxval = 255;
    std::vector<std::uint32_t> samples;  // row-major

    int bit_depth() const { return maxval > 255 ? 16 : 8; }
};

namespace detail {

inline void skip_pgm_space(const std::string& buf, std::size_t& pos) {
    while (pos < buf.size()) {
        if (std::isspace(static_cast<unsigned char>(buf[pos]))) {
            ++pos;
        } else if (buf[pos] == '#') {
            while (pos < buf.size() && buf[pos] != '\n' && buf[pos] != '\r') ++pos;
        } else {
            break;
        }
    }
}

inline std::uint64_t read_pgm_uint(const std::string& buf, std::size_t& pos,
                                   const std::string& path) {
    skip_pgm_space(buf, pos);
    if (pos >= buf.size() || !std::isdigit(static_cast<unsigned char>(buf[pos]))) {
        throw InputError(path + ": malformed PGM header");
    }
    std::uint64_t v = 0;
    while (pos < buf.size() && std::isdigit(static_cast<unsigned char>(buf[pos]))) {
        v = v * 10 + static_cast<std::uint64_t>(buf[pos] - '0');
        if (v > (1ull << 32)) throw InputError(path + ": PGM header value too large");
        ++pos;
    }
    return v;
}

}  // namespace detail

inline GrayImage parse_pgm(const std::string& buf, const std::string& path = "<memory>") {
    if (buf.size() < 2 || buf[0] != 'P' || buf[1] != '5') {
        throw InputError(path + ": not a binary PGM (P5) file");
    }
    std::size_t pos = 2;
    GrayImage img;
    img.width = detail::read_pgm_uint(buf, pos, path);
    img.height = detail::read_pgm_uint(buf, pos, path);
    const auto maxval = detail::read_pgm_uint(buf, pos, path);
    if (img.width == 0 || img.height == 0) throw InputError(path + ": zero image dimension");
    if (maxval == 0 || maxval > 65535) {
        throw InputError(path + ": PGM maxval must be in [1, 65535]");
    }
    img.maxval = static_cast<std::uint32_t>(maxval);
    // Exactly one whitespace byte separates the header from the raster.
    if (pos >= buf.size() || !std::isspace(static_cast<unsigned char>(buf[pos]))) {
        throw InputError(path + ": malformed PGM header");
    }
    ++pos;

    const std::size_t count = img.width * img.height;
    const std::size_t bytes_per = img.maxval > 255 ? 2 : 1;
    if (buf.size() - pos < count * bytes_per) {
        throw InputError(path + ": truncated PGM raster");
    }
    img.samples.resize(count);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t v = bytes_per == 2 ? (std::uint32_t{p[2 * i]} << 8) | p[2 * i + 1] : p[i];
        if (v > img.maxval) throw InputError(path + ": sample exceeds maxval");
        img.samples[i] = v;
    }
    return img;
}

inline GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open frame file " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_pgm(buf, path.string());
}

inline std::string encode_pgm(const GrayImage& img) {
    if (img.samples.size() != img.width * img.height) {
        throw InputError("image sample count does not match dimensions");
    }
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n" + std::to_string(img.maxval) + "\n";
    const bool wide = img.maxval > 255;
    out.reserve(out.size() + img.samples.size() * (wide ? 2 : 1));
    for (auto v : img.samples) {
        if (v > img.maxval) throw InputError("sample exceeds maxval");
        if (wide) {
            out.push_back(static_cast<char>((v >> 8) & 0xff));
            out.push_back(static_cast<char>(v & 0xff));
        } else {
            out.push_back(static_cast<char>(v));
        }
    }
    return out;
}

inline void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
    const std::string bytes = encode_pgm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("short write to " + path.string());
}

}  // namespace bgsup
