#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "faith/dataset.hpp"

namespace faith {

struct Rgb {
    unsigned char r = 0;
    unsigned char g = 0;
    unsigned char b = 0;

    bool operator==(const Rgb&) const = default;
};

/// Named color tags used by box annotations and drawing.
Rgb color_from_tag(const std::string& tag);

/// 8-bit interleaved raster, 3 (RGB) or 4 (RGBA) channels, row-major.
struct Image {
    long width = 0;
    long height = 0;
    int channels = 3;
    std::vector<unsigned char> pixels;

    static Image solid(long width, long height, Rgb color, int channels = 3);

    bool in_bounds(long x, long y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }
    std::size_t offset(long x, long y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels);
    }
    void set_pixel(long x, long y, Rgb color);
    Rgb pixel(long x, long y) const;

    bool operator==(const Image&) const = default;
};

Image read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);

struct PixelRect {
    long x = 0;
    long y = 0;
    long w = 0;
    long h = 0;

    bool contains(long px, long py) const {
        return px >= x && px < x + w && py >= y && py < y + h;
    }
    bool operator==(const PixelRect&) const = default;
};

/// Geometry of the embedded 5x7 bitmap font at integer scale.
long text_width_px(std::size_t length, long scale);
long text_height_px(long scale);

/// True when every character of `text` (after uppercasing) has a glyph.
bool text_renderable(std::string_view text);

/// Draws `text` with the embedded font, top-left corner at (x, y), each font
/// pixel expanded to scale x scale. Pixels falling outside the image are
/// clipped. Throws on characters without a glyph.
void draw_text(Image& image, long x, long y, long scale, Rgb color, std::string_view text);

void fill_rect(Image& image, PixelRect rect, Rgb color);

/// Redraws a box outline at the given thickness, centered on the box's
/// one-pixel boundary ring and clipped to the image.
void draw_box_outline(Image& image, const Box& box, long thickness, Rgb color);

}  // namespace faith
