#include "faith/image.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <map>

#include "faith/error.hpp"
#include "faith/util.hpp"

namespace faith {

namespace fs = std::filesystem;

Rgb color_from_tag(const std::string& tag) {
    static const std::map<std::string, Rgb> palette = {
        {"red", {255, 0, 0}},      {"green", {0, 255, 0}},    {"blue", {0, 0, 255}},
        {"yellow", {255, 255, 0}}, {"orange", {255, 165, 0}}, {"purple", {128, 0, 128}},
        {"cyan", {0, 255, 255}},   {"magenta", {255, 0, 255}}, {"white", {255, 255, 255}},
        {"black", {0, 0, 0}},      {"gray", {128, 128, 128}},
    };
    const auto it = palette.find(to_lower(tag));
    if (it == palette.end()) {
        std::string known;
        for (const auto& [name, rgb] : palette) {
            known += known.empty() ? name : ", " + name;
        }
        raise("unknown color tag \"", tag, "\" (known: ", known, ')');
    }
    return it->second;
}

Image Image::solid(long width, long height, Rgb color, int channels) {
    require(width >= 1 && height >= 1, "image dimensions must be positive, got ", width, "x",
            height);
    require(channels == 3 || channels == 4, "image must have 3 or 4 channels, got ", channels);
    Image image;
    image.width = width;
    image.height = height;
    image.channels = channels;
    image.pixels.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                        static_cast<std::size_t>(channels));
    for (long y = 0; y < height; ++y) {
        for (long x = 0; x < width; ++x) {
            image.set_pixel(x, y, color);
            if (channels == 4) {
                image.pixels[image.offset(x, y) + 3] = 255;
            }
        }
    }
    return image;
}

void Image::set_pixel(long x, long y, Rgb color) {
    const std::size_t at = offset(x, y);
    pixels[at] = color.r;
    pixels[at + 1] = color.g;
    pixels[at + 2] = color.b;
}

Rgb Image::pixel(long x, long y) const {
    const std::size_t at = offset(x, y);
    return {pixels[at], pixels[at + 1], pixels[at + 2]};
}

Image read_png(const fs::path& path) {
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_file(&png, path.string().c_str()) == 0) {
        raise("cannot decode PNG ", path.string(), ": ", png.message);
    }
    const bool has_alpha = (png.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    png.format = has_alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;

    Image image;
    image.width = static_cast<long>(png.width);
    image.height = static_cast<long>(png.height);
    image.channels = has_alpha ? 4 : 3;
    image.pixels.resize(PNG_IMAGE_SIZE(png));
    if (png_image_finish_read(&png, nullptr, image.pixels.data(), 0, nullptr) == 0) {
        raise("cannot decode PNG ", path.string(), ": ", png.message);
    }
    return image;
}

void write_png(const fs::path& path, const Image& image) {
    require(image.width >= 1 && image.height >= 1, "cannot write empty image to ", path.string());
    require(image.channels == 3 || image.channels == 4,
            "cannot write image with ", image.channels, " channels");
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    png_image png{};
    png.version = PNG_IMAGE_VERSION;
    png.width = static_cast<png_uint_32>(image.width);
    png.height = static_cast<png_uint_32>(image.height);
    png.format = image.channels == 4 ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    if (png_image_write_to_file(&png, path.string().c_str(), 0, image.pixels.data(), 0,
                                nullptr) == 0) {
        raise("cannot write PNG ", path.string(), ": ", png.message);
    }
}

namespace {

// 5x7 glyphs, one byte per row, low 5 bits used (MSB of the 5 = leftmost).
using Glyph = std::array<unsigned char, 7>;

const std::map<char, Glyph>& font() {
    static const std::map<char, Glyph> glyphs = {
        {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
        {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
        {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
        {'D', {0x1E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1E}},
        {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
        {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
        {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
        {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
        {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
        {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
        {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
        {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
        {'N', {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11}},
        {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
        {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
        {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
        {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
        {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
        {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
        {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
        {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
        {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
        {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
        {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
        {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
        {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
        {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
        {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
        {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
        {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
        {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
        {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
        {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
        {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
        {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
        {' ', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00}},
        {':', {0x00, 0x04, 0x04, 0x00, 0x04, 0x04, 0x00}},
        {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
        {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
        {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
        {',', {0x00, 0x00, 0x00, 0x00, 0x06, 0x04, 0x08}},
        {'!', {0x04, 0x04, 0x04, 0x04, 0x04, 0x00, 0x04}},
        {'?', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04}},
        {'\'', {0x04, 0x04, 0x08, 0x00, 0x00, 0x00, 0x00}},
        {'-', {0x00, 0x00, 0x00, 0x0E, 0x00, 0x00, 0x00}},
        {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
        {'*', {0x00, 0x0A, 0x04, 0x1F, 0x04, 0x0A, 0x00}},
    };
    return glyphs;
}

char glyph_key(char c) {
    return static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
}

}  // namespace

long text_width_px(std::size_t length, long scale) {
    if (length == 0) return 0;
    return (6 * static_cast<long>(length) - 1) * scale;
}

long text_height_px(long scale) {
    return 7 * scale;
}

bool text_renderable(std::string_view text) {
    for (char c : text) {
        if (font().count(glyph_key(c)) == 0) {
            return false;
        }
    }
    return true;
}

void draw_text(Image& image, long x, long y, long scale, Rgb color, std::string_view text) {
    require(scale >= 1, "text scale must be >= 1, got ", scale);
    long pen_x = x;
    for (char c : text) {
        const auto it = font().find(glyph_key(c));
        require(it != font().end(), "no glyph for character '", std::string(1, c), '\'');
        const Glyph& glyph = it->second;
        for (int row = 0; row < 7; ++row) {
            for (int col = 0; col < 5; ++col) {
                if ((glyph[static_cast<std::size_t>(row)] & (0x10 >> col)) == 0) continue;
                for (long dy = 0; dy < scale; ++dy) {
                    for (long dx = 0; dx < scale; ++dx) {
                        const long px = pen_x + col * scale + dx;
                        const long py = y + row * scale + dy;
                        if (image.in_bounds(px, py)) {
                            image.set_pixel(px, py, color);
                        }
                    }
                }
            }
        }
        pen_x += 6 * scale;
    }
}

void fill_rect(Image& image, PixelRect rect, Rgb color) {
    const long x0 = std::max(rect.x, 0L);
    const long y0 = std::max(rect.y, 0L);
    const long x1 = std::min(rect.x + rect.w, image.width);
    const long y1 = std::min(rect.y + rect.h, image.height);
    for (long y = y0; y < y1; ++y) {
        for (long x = x0; x < x1; ++x) {
            image.set_pixel(x, y, color);
        }
    }
}

void draw_box_outline(Image& image, const Box& box, long thickness, Rgb color) {
    require(thickness >= 1, "outline thickness must be >= 1, got ", thickness);
    const long grow = thickness / 2;
    const long shrink = thickness - grow;
    const long outer_x0 = box.x - grow;
    const long outer_y0 = box.y - grow;
    const long outer_x1 = box.x + box.w + grow;
    const long outer_y1 = box.y + box.h + grow;
    const long hole_x0 = box.x + shrink;
    const long hole_y0 = box.y + shrink;
    const long hole_x1 = box.x + box.w - shrink;
    const long hole_y1 = box.y + box.h - shrink;
    const bool has_hole = hole_x0 < hole_x1 && hole_y0 < hole_y1;
    for (long y = std::max(outer_y0, 0L); y < std::min(outer_y1, image.height); ++y) {
        for (long x = std::max(outer_x0, 0L); x < std::min(outer_x1, image.width); ++x) {
            if (has_hole && x >= hole_x0 && x < hole_x1 && y >= hole_y0 && y < hole_y1) {
                continue;
            }
            image.set_pixel(x, y, color);
        }
    }
}

}  // namespace faith
