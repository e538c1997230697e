// SPDX-License-Identifier: Apache-2.0
#include "vistrace/actions/ops.hpp"

#include "vistrace/actions/font.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

namespace vistrace::actions {

namespace {

void require_valid(const ImageData& img, const char* op) {
    if (!img.valid()) throw InvalidArgument(fmt::format("{}: invalid image", op));
}

int text_scale(int width, int height) noexcept { return std::max(1, std::min(width, height) / 160); }

void fill_rect(ImageData& img, const PixelRect& r, Rgb color) {
    const int x0 = std::max(r.x0, 0);
    const int y0 = std::max(r.y0, 0);
    const int x1 = std::min(r.x1, img.width);
    const int y1 = std::min(r.y1, img.height);
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            auto* p = img.at(x, y);
            p[0] = color[0];
            p[1] = color[1];
            p[2] = color[2];
        }
    }
}

Rgb contrast_text(Rgb background) noexcept {
    return luma(background[0], background[1], background[2]) >= 128 ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
}

int round_to_int(double v) noexcept { return static_cast<int>(std::lround(v)); }

} // namespace

ImageData color_transform(const ImageData& img) {
    require_valid(img, "color_transform");
    ImageData out = img;
    const auto stride = static_cast<std::size_t>(img.channels);
    for (std::size_t i = 0; i < out.pixels.size(); i += stride) {
        const auto l = luma(out.pixels[i], out.pixels[i + 1], out.pixels[i + 2]);
        out.pixels[i] = out.pixels[i + 1] = out.pixels[i + 2] = l;
    }
    return out;
}

ImageData edge_detect(const ImageData& img, int threshold) {
    require_valid(img, "edge_detect");
    const int w = img.width;
    const int h = img.height;

    std::vector<int> gray(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const auto* p = img.at(x, y);
            gray[static_cast<std::size_t>(y) * w + x] = luma(p[0], p[1], p[2]);
        }
    auto g = [&](int x, int y) {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return gray[static_cast<std::size_t>(y) * w + x];
    };

    // |gx| and |gy| each peak at 4 * 255.
    const double max_magnitude = 4.0 * 255.0 * std::sqrt(2.0);
    ImageData out = img;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int gx = (g(x + 1, y - 1) + 2 * g(x + 1, y) + g(x + 1, y + 1)) -
                           (g(x - 1, y - 1) + 2 * g(x - 1, y) + g(x - 1, y + 1));
            const int gy = (g(x - 1, y + 1) + 2 * g(x, y + 1) + g(x + 1, y + 1)) -
                           (g(x - 1, y - 1) + 2 * g(x, y - 1) + g(x + 1, y - 1));
            const double magnitude = std::sqrt(static_cast<double>(gx * gx + gy * gy));
            const int normalized = round_to_int(magnitude * 255.0 / max_magnitude);
            const std::uint8_t v = normalized >= threshold ? 255 : 0;
            auto* p = out.at(x, y);
            p[0] = p[1] = p[2] = v;
        }
    }
    return out;
}

PixelRect crop_rect(const Box& box, int width, int height, double margin) {
    PixelRect r{std::clamp(round_to_int(box.x0 * width), 0, width), std::clamp(round_to_int(box.y0 * height), 0, height),
                std::clamp(round_to_int(box.x1 * width), 0, width),
                std::clamp(round_to_int(box.y1 * height), 0, height)};
    if (r.empty())
        throw DegenerateBox(fmt::format("box ({}, {}, {}, {}) rounds to an empty crop on {}x{}", box.x0, box.y0,
                                        box.x1, box.y1, width, height));
    const int mx = round_to_int(margin * r.width());
    const int my = round_to_int(margin * r.height());
    return PixelRect{std::max(0, r.x0 - mx), std::max(0, r.y0 - my), std::min(width, r.x1 + mx),
                     std::min(height, r.y1 + my)};
}

ImageData zoom_crop(const ImageData& img, const Box& box, double upscale, double margin, int max_side) {
    require_valid(img, "zoom_crop");
    if (!(upscale > 0.0)) throw InvalidArgument("zoom_crop: upscale must be positive");
    const auto r = crop_rect(box, img.width, img.height, margin);

    const int longest = std::max(r.width(), r.height());
    double factor = upscale;
    if (max_side > 0 && longest * factor > max_side) factor = static_cast<double>(max_side) / longest;
    const int out_w = std::max(1, round_to_int(r.width() * factor));
    const int out_h = std::max(1, round_to_int(r.height() * factor));

    ImageData out(out_w, out_h, img.channels);
    const auto bytes = static_cast<std::size_t>(img.channels);
    for (int y = 0; y < out_h; ++y) {
        const int sy = r.y0 + static_cast<int>(static_cast<long long>(y) * r.height() / out_h);
        for (int x = 0; x < out_w; ++x) {
            const int sx = r.x0 + static_cast<int>(static_cast<long long>(x) * r.width() / out_w);
            std::copy_n(img.at(sx, sy), bytes, out.at(x, y));
        }
    }
    return out;
}

RulerLayout ruler_layout(int width, int height, int stroke) {
    stroke = std::max(1, stroke);
    RulerLayout layout;
    const int hs = std::max(0, height / 2 - stroke / 2);
    const int vs = std::max(0, width / 2 - stroke / 2);
    layout.horizontal_axis = {0, hs, width, std::min(height, hs + stroke)};
    layout.vertical_axis = {vs, 0, std::min(width, vs + stroke), height};

    const int s = text_scale(width, height);
    layout.label_scale = s;
    const auto extent = measure_text("Q1", s);
    const int lw = extent.width + 2 * s;
    const int lh = extent.height + 2 * s;
    const int inset = 3 * s;

    const int top = layout.horizontal_axis.y0;
    const int bottom = height - layout.horizontal_axis.y1;
    const int left = layout.vertical_axis.x0;
    const int right = width - layout.vertical_axis.x1;
    const bool fits = std::min(top, bottom) >= lh + 2 * inset && std::min(left, right) >= lw + 2 * inset;
    if (fits) {
        layout.label_boxes = {
            {inset, inset, inset + lw, inset + lh},
            {width - inset - lw, inset, width - inset, inset + lh},
            {width - inset - lw, height - inset - lh, width - inset, height - inset},
            {inset, height - inset - lh, inset + lw, height - inset},
        };
    }
    return layout;
}

ImageData spatial_ruler(const ImageData& img, int stroke) {
    require_valid(img, "spatial_ruler");
    std::uint64_t sum = 0;
    const auto step = static_cast<std::size_t>(img.channels);
    for (std::size_t i = 0; i < img.pixels.size(); i += step)
        sum += luma(img.pixels[i], img.pixels[i + 1], img.pixels[i + 2]);
    const auto mean = sum / (static_cast<std::uint64_t>(img.width) * static_cast<std::uint64_t>(img.height));
    const Rgb axis = mean >= 128 ? Rgb{0, 0, 0} : Rgb{255, 255, 255};
    const Rgb patch = mean >= 128 ? Rgb{255, 255, 255} : Rgb{0, 0, 0};

    const auto layout = ruler_layout(img.width, img.height, stroke);
    ImageData out = img;
    fill_rect(out, layout.horizontal_axis, axis);
    fill_rect(out, layout.vertical_axis, axis);

    static constexpr std::array<std::string_view, 4> kLabels{"Q1", "Q2", "Q3", "Q4"};
    const int s = layout.label_scale;
    for (std::size_t i = 0; i < layout.label_boxes.size(); ++i) {
        const auto& box = layout.label_boxes[i];
        fill_rect(out, box, patch);
        draw_text(out, box.x0 + s, box.y0 + s, kLabels[i], axis, s);
    }
    return out;
}

std::vector<Rgb> default_palette() {
    return {{230, 25, 75},  {60, 180, 75},  {255, 225, 25}, {0, 130, 200},
            {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230}};
}

PixelRect box_pixels(const Box& box, int width, int height) noexcept {
    PixelRect r{std::clamp(round_to_int(box.x0 * width), 0, width - 1),
                std::clamp(round_to_int(box.y0 * height), 0, height - 1),
                std::clamp(round_to_int(box.x1 * width), 0, width), std::clamp(round_to_int(box.y1 * height), 0, height)};
    r.x1 = std::max(r.x1, r.x0 + 1);
    r.y1 = std::max(r.y1, r.y0 + 1);
    return r;
}

PixelRect label_rect(const Box& box, int width, int height, int stroke) {
    if (box.label.empty()) return {};
    const int s = text_scale(width, height);
    const auto extent = measure_text(box.label, s);
    const int lw = extent.width + 2 * s;
    const int lh = extent.height + 2 * s;
    const auto r = box_pixels(box, width, height);

    int x = r.x0;
    int y = r.y0 - lh;
    if (y < 0) {
        x = r.x0 + stroke;
        y = r.y0 + stroke;
    }
    x = std::max(0, std::min(x, width - lw));
    y = std::max(0, std::min(y, height - lh));
    return PixelRect{x, y, std::min(width, x + lw), std::min(height, y + lh)};
}

ImageData draw_boxes(const ImageData& img, std::span<const Box> boxes, int stroke, std::span<const Rgb> palette) {
    require_valid(img, "draw_boxes");
    const auto fallback = default_palette();
    if (palette.empty()) palette = fallback;
    stroke = std::max(1, stroke);

    ImageData out = img;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const auto& box = boxes[i];
        const Rgb color = palette[i % palette.size()];
        const auto r = box_pixels(box, img.width, img.height);
        for (int y = r.y0; y < r.y1; ++y) {
            for (int x = r.x0; x < r.x1; ++x) {
                const bool edge = x < r.x0 + stroke || x >= r.x1 - stroke || y < r.y0 + stroke || y >= r.y1 - stroke;
                if (!edge) continue;
                auto* p = out.at(x, y);
                p[0] = color[0];
                p[1] = color[1];
                p[2] = color[2];
            }
        }

        const auto lr = label_rect(box, img.width, img.height, stroke);
        if (lr.empty()) continue;
        const int s = text_scale(img.width, img.height);
        fill_rect(out, lr, color);
        draw_text(out, lr.x0 + s, lr.y0 + s, box.label, contrast_text(color), s);
    }
    return out;
}

} // namespace vistrace::actions
