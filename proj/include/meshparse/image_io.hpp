#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <memory>
#include <string>

#include <png.h>

#include "meshparse/error.hpp"
#include "meshparse/mesh_io.hpp"
#include "meshparse/render.hpp"
#include "meshparse/types.hpp"

namespace meshparse {

// ---------------------------------------------------------------------------
// PGM (8-bit grayscale, binary P5; ASCII P2 accepted on read)

inline void write_pgm(const Image<std::uint8_t>& img, const std::filesystem::path& path) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size());
    detail::write_file(path, out);
}

inline Image<std::uint8_t> read_pgm(const std::filesystem::path& path) {
    const std::string data = detail::read_file(path);
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) {
        throw ParseError(path.string() + ": byte offset " + std::to_string(pos) + ": " + what);
    };
    auto token = [&]() -> std::string {
        while (pos < data.size()) {
            if (data[pos] == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
        std::size_t start = pos;
        while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
        if (start == pos) fail("unexpected end of PGM header");
        return data.substr(start, pos - start);
    };
    const std::string magic = token();
    if (magic != "P5" && magic != "P2") fail("not a PGM file");
    auto number = [&]() {
        auto v = detail::parse_number<int>(token());
        if (!v || *v <= 0) fail("bad PGM header number");
        return *v;
    };
    const int w = number(), h = number(), maxval = number();
    if (maxval > 255) fail("only 8-bit PGM is supported");
    Image<std::uint8_t> img(w, h, 0);
    if (magic == "P5") {
        ++pos;  // single whitespace after maxval
        if (data.size() - std::min(pos, data.size()) < img.data.size()) fail("truncated PGM raster");
        std::memcpy(img.data.data(), data.data() + pos, img.data.size());
    } else {
        for (auto& px : img.data) {
            auto v = detail::parse_number<int>(token());
            if (!v || *v < 0 || *v > maxval) fail("bad PGM sample");
            px = static_cast<std::uint8_t>(*v);
        }
    }
    return img;
}

// ---------------------------------------------------------------------------
// PNG (8-bit grayscale) via libpng

namespace detail {
struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;
}  // namespace detail

inline Image<std::uint8_t> read_png_gray(const std::filesystem::path& path) {
    detail::FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw IoError("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }
    Image<std::uint8_t> img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError(path.string() + ": malformed PNG");
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    const auto depth = png_get_bit_depth(png, info);
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ParseError(path.string() + ": label PNG must be 8-bit grayscale");
    }
    img = Image<std::uint8_t>(static_cast<int>(png_get_image_width(png, info)),
                              static_cast<int>(png_get_image_height(png, info)), 0);
    rows.resize(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = &img.at(0, y);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

inline void write_png_gray(const Image<std::uint8_t>& img, const std::filesystem::path& path) {
    detail::FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw IoError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }
    std::vector<png_const_bytep> rows(static_cast<std::size_t>(img.height));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encoding failed: " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = &img.at(0, y);
    png_write_image(png, const_cast<png_bytepp>(rows.data()));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Label image: pixel value = label index. PNG or PGM by extension.
inline LabelImage read_label_image(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") return read_png_gray(path);
    if (ext == ".pgm") return read_pgm(path);
    throw ContractError("label image must be .png or .pgm: " + path.string());
}

inline void write_label_image(const LabelImage& img, const std::filesystem::path& path) {
    auto ext = path.extension().string();
    if (ext == ".png") write_png_gray(img, path);
    else write_pgm(img, path);
}

// ---------------------------------------------------------------------------
// Raw buffer grids: 16-byte header {magic[4], uint32 width, uint32 height,
// uint32 bytes per element} followed by row-major little-endian elements.

inline constexpr char kTriangleIdMagic[4] = {'T', 'R', 'I', 'D'};
inline constexpr char kDepthMagic[4] = {'D', 'E', 'P', 'T'};

namespace detail {

template <typename T>
void write_raw_grid(const Image<T>& img, const char (&magic)[4], const std::filesystem::path& path) {
    static_assert(sizeof(T) == 4);
    std::string out(magic, 4);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(img.width));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(img.height));
    put<std::uint32_t>(out, sizeof(T));
    out.append(reinterpret_cast<const char*>(img.data.data()), img.data.size() * sizeof(T));
    write_file(path, out);
}

template <typename T>
Image<T> read_raw_grid(const char (&magic)[4], const std::filesystem::path& path) {
    const std::string data = read_file(path);
    if (data.size() < 16 || std::memcmp(data.data(), magic, 4) != 0)
        throw ParseError(path.string() + ": byte offset 0: bad buffer magic");
    std::uint32_t hdr[3];
    std::memcpy(hdr, data.data() + 4, sizeof hdr);
    if (hdr[2] != sizeof(T)) throw ParseError(path.string() + ": byte offset 12: unexpected element size");
    Image<T> img(static_cast<int>(hdr[0]), static_cast<int>(hdr[1]), T{});
    if (data.size() != 16 + img.data.size() * sizeof(T))
        throw ParseError(path.string() + ": byte offset 16: raster size does not match header");
    std::memcpy(img.data.data(), data.data() + 16, img.data.size() * sizeof(T));
    return img;
}

}  // namespace detail

inline void write_triangle_ids(const Image<std::int32_t>& ids, const std::filesystem::path& path) {
    detail::write_raw_grid(ids, kTriangleIdMagic, path);
}
inline Image<std::int32_t> read_triangle_ids(const std::filesystem::path& path) {
    return detail::read_raw_grid<std::int32_t>(kTriangleIdMagic, path);
}
inline void write_depth(const Image<float>& depth, const std::filesystem::path& path) {
    detail::write_raw_grid(depth, kDepthMagic, path);
}
inline Image<float> read_depth(const std::filesystem::path& path) {
    return detail::read_raw_grid<float>(kDepthMagic, path);
}

// Grayscale preview: nearest surface white, farthest dark gray, background black.
inline Image<std::uint8_t> depth_preview(const RenderBuffers& buffers) {
    float lo = std::numeric_limits<float>::infinity(), hi = -lo;
    for (float d : buffers.depth.data)
        if (std::isfinite(d)) {
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
    Image<std::uint8_t> img(buffers.width(), buffers.height(), 0);
    const float span = hi > lo ? hi - lo : 1.0f;
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const float d = buffers.depth.data[i];
        if (!std::isfinite(d)) continue;
        img.data[i] = static_cast<std::uint8_t>(255.0f - 191.0f * (d - lo) / span);
    }
    return img;
}

}  // namespace meshparse
