#include "faith/image_bias.hpp"

#include <algorithm>
#include <cmath>

#include "faith/error.hpp"
#include "faith/util.hpp"

namespace faith {

ImageBiasParams image_params_from_spec(const BiasSpec& spec) {
    validate_bias_spec(spec);
    ImageBiasParams params;
    params.hint_template = spec.param_or("hint_template", params.hint_template);
    params.hint_x = spec.param_long_or("hint_x", params.hint_x);
    params.hint_y = spec.param_long_or("hint_y", params.hint_y);
    params.hint_scale = spec.param_double_or("hint_scale", params.hint_scale);
    params.base_thickness_px = spec.param_long_or("base_thickness_px", params.base_thickness_px);
    params.thick_thickness_px =
        spec.param_long_or("thick_thickness_px", params.thick_thickness_px);

    require(count_occurrences(params.hint_template, "{label}") == 1,
            "hint_template must contain exactly one {label} placeholder, got \"",
            params.hint_template, '"');
    require(params.hint_scale > 0.0 && params.hint_scale <= 0.2,
            "hint_scale must be in (0, 0.2], got ", params.hint_scale);
    require(params.base_thickness_px >= 1, "base_thickness_px must be >= 1, got ",
            params.base_thickness_px);
    require(params.thick_thickness_px > params.base_thickness_px,
            "thick_thickness_px must exceed base_thickness_px, got ",
            params.thick_thickness_px, " vs ", params.base_thickness_px);
    require(params.hint_x >= 0 && params.hint_y >= 0,
            "hint position must be nonnegative, got (", params.hint_x, ", ", params.hint_y, ')');
    return params;
}

namespace {

long hint_scale_px(const Image& image, const ImageBiasParams& params) {
    const long scale = std::lround(params.hint_scale * static_cast<double>(image.width) / 7.0);
    return std::max(1L, scale);
}

}  // namespace

PixelRect hint_strip_rect(const Image& image, const std::string& rendered_text,
                          const ImageBiasParams& params) {
    const long scale = hint_scale_px(image, params);
    PixelRect rect;
    rect.x = params.hint_x;
    rect.y = params.hint_y;
    rect.w = text_width_px(rendered_text.size(), scale) + 2 * scale;
    rect.h = text_height_px(scale) + 2 * scale;
    rect.w = std::min(rect.w, image.width - rect.x);
    rect.h = std::min(rect.h, image.height - rect.y);
    require(rect.w > 0 && rect.h > 0, "hint position (", params.hint_x, ", ", params.hint_y,
            ") lies outside the ", image.width, "x", image.height, " image");
    return rect;
}

Image overlay_hint(const Image& image, Label label, const ImageBiasParams& params) {
    const std::string text = replace_all(params.hint_template, "{label}", to_string(label));
    require(text_renderable(text), "hint text contains characters without a glyph: \"", text,
            '"');
    const long scale = hint_scale_px(image, params);
    const PixelRect strip = hint_strip_rect(image, text, params);

    Image out = image;
    fill_rect(out, strip, color_from_tag("white"));
    draw_text(out, params.hint_x + scale, params.hint_y + scale, scale, color_from_tag("red"),
              text);
    return out;
}

namespace {

void check_box_bounds(const Image& image, const Box& box) {
    require(box.x >= 0 && box.y >= 0 && box.x + box.w <= image.width &&
                box.y + box.h <= image.height,
            "box \"", box.name, "\" (", box.x, ",", box.y, ",", box.w, ",", box.h,
            ") exceeds image bounds ", image.width, "x", image.height);
}

}  // namespace

Image thicken_bbox(const Image& image, const Box& box, const ImageBiasParams& params) {
    check_box_bounds(image, box);
    Image out = image;
    draw_box_outline(out, box, params.thick_thickness_px, color_from_tag(box.color));
    return out;
}

std::pair<Image, std::vector<Box>> mirror_image(const Image& image,
                                                const std::vector<Box>& boxes) {
    for (const Box& box : boxes) {
        check_box_bounds(image, box);
    }
    Image out = image;
    for (long y = 0; y < image.height; ++y) {
        for (long x = 0; x < image.width; ++x) {
            const std::size_t src = image.offset(image.width - 1 - x, y);
            const std::size_t dst = out.offset(x, y);
            for (int c = 0; c < image.channels; ++c) {
                out.pixels[dst + static_cast<std::size_t>(c)] =
                    image.pixels[src + static_cast<std::size_t>(c)];
            }
        }
    }
    std::vector<Box> mirrored = boxes;
    for (Box& box : mirrored) {
        box.x = image.width - box.x - box.w;
    }
    return {std::move(out), std::move(mirrored)};
}

const Box& ground_truth_box(const Question& q) {
    require(q.boxes.has_value(), "question ", q.id, ": bias needs box annotations");
    const std::string want = to_lower(q.ground_truth_text());
    const Box* found = nullptr;
    for (const Box& box : *q.boxes) {
        if (to_lower(box.name) == want) {
            require(found == nullptr, "question ", q.id, ": multiple boxes named \"",
                    q.ground_truth_text(), '"');
            found = &box;
        }
    }
    require(found != nullptr, "question ", q.id, ": no box named \"", q.ground_truth_text(),
            '"');
    return *found;
}

namespace {

const Box& single_other_box(const Question& q, const Box& gt_box) {
    const Box* found = nullptr;
    for (const Box& box : *q.boxes) {
        if (&box == &gt_box) continue;
        require(found == nullptr, "question ", q.id,
                ": box biases need exactly two boxes, got ", q.boxes->size());
        found = &box;
    }
    require(found != nullptr, "question ", q.id, ": box biases need exactly two boxes, got ",
            q.boxes->size());
    return *found;
}

std::vector<std::string> color_mention_warnings(const Question& q) {
    std::vector<std::string> warnings;
    if (!q.boxes) return warnings;
    const std::string stem = to_lower(q.stem);
    for (const Box& box : *q.boxes) {
        const std::string tag = to_lower(box.color);
        if (stem.find(tag) != std::string::npos) {
            warnings.push_back("question " + q.id + ": stem mentions box color \"" + tag +
                               "\"; mirrored layout may contradict it");
        }
    }
    return warnings;
}

}  // namespace

ImagePairResult apply_image_bias(const Question& q, const Image& image, const BiasSpec& spec) {
    require(bias_is_visual(spec.kind), "apply_image_bias called with ", to_string(spec.kind));
    const ImageBiasParams params = image_params_from_spec(spec);
    if (q.boxes) {
        for (const Box& box : *q.boxes) {
            check_box_bounds(image, box);
        }
    }

    ImagePairResult result;
    result.plus_boxes = q.boxes.value_or(std::vector<Box>{});
    result.minus_boxes = result.plus_boxes;

    switch (spec.kind) {
        case BiasKind::ImageHint: {
            result.plus = overlay_hint(image, q.ground_truth, params);
            result.minus = overlay_hint(image, other(q.ground_truth), params);
            break;
        }
        case BiasKind::ImageBBoxThicken: {
            const Box& gt_box = ground_truth_box(q);
            const Box& other_box = single_other_box(q, gt_box);
            result.plus = thicken_bbox(image, gt_box, params);
            result.minus = thicken_bbox(image, other_box, params);
            break;
        }
        case BiasKind::ImageMirror: {
            const Box& gt_box = ground_truth_box(q);
            const Box& other_box = single_other_box(q, gt_box);
            const long gt_center = 2 * gt_box.x + gt_box.w;
            const long other_center = 2 * other_box.x + other_box.w;
            require(gt_center != other_center, "question ", q.id,
                    ": boxes share a horizontal center; left/right is undefined");
            auto [mirrored, mirrored_boxes] = mirror_image(image, *q.boxes);
            if (gt_center < other_center) {
                result.plus = image;
                result.minus = std::move(mirrored);
                result.minus_boxes = std::move(mirrored_boxes);
            } else {
                result.plus = std::move(mirrored);
                result.plus_boxes = std::move(mirrored_boxes);
                result.minus = image;
            }
            for (auto& warning : color_mention_warnings(q)) {
                result.warnings.push_back(std::move(warning));
            }
            break;
        }
        default:
            raise("apply_image_bias called with ", to_string(spec.kind));
    }
    return result;
}

}  // namespace faith
