// SPDX-License-Identifier: Apache-2.0
#include "vistrace/core/types.hpp"

#include "vistrace/core/error.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <utility>

#include <fmt/core.h>

namespace vistrace {

ImageData::ImageData(int w, int h, int c)
    : width(w), height(h), channels(c),
      pixels(static_cast<std::size_t>(std::max(w, 0)) * static_cast<std::size_t>(std::max(h, 0)) *
             static_cast<std::size_t>(std::max(c, 0))) {}

ImageData::ImageData(int w, int h, int c, std::vector<std::uint8_t> data)
    : width(w), height(h), channels(c), pixels(std::move(data)) {}

ImageData ImageData::filled(int w, int h, std::array<std::uint8_t, 3> rgb, int c) {
    ImageData img(w, h, c);
    for (std::size_t i = 0; i < img.pixels.size(); i += static_cast<std::size_t>(c)) {
        img.pixels[i] = rgb[0];
        img.pixels[i + 1] = rgb[1];
        img.pixels[i + 2] = rgb[2];
        if (c == 4) img.pixels[i + 3] = 255;
    }
    return img;
}

bool ImageData::valid() const noexcept {
    if (width < 1 || height < 1) return false;
    if (channels != 3 && channels != 4) return false;
    return pixels.size() ==
           static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * static_cast<std::size_t>(channels);
}

bool Box::valid() const noexcept {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    return unit(x0) && unit(y0) && unit(x1) && unit(y1) && unit(score) && x0 < x1 && y0 < y1;
}

namespace {

struct ActionName {
    ActionKind kind;
    std::string_view canonical;
    std::string_view display;
};

constexpr std::array<ActionName, 7> kActionNames{{
    {ActionKind::Segmentation, "segmentation", "segmentation"},
    {ActionKind::EdgeDetection, "edge_detection", "edge detection"},
    {ActionKind::ZoomIn, "zoom_in", "zoom in"},
    {ActionKind::DenseObjectDetection, "dense_object_detection", "dense object detection"},
    {ActionKind::ReferringObjectDetection, "referring_object_detection", "referring object detection"},
    {ActionKind::SpatialRuler, "spatial_ruler", "spatial ruler"},
    {ActionKind::ColorTransform, "color_transform", "color transform"},
}};

// Coarse names used in plans and reports, beyond the display names above.
constexpr std::array<std::pair<std::string_view, ActionKind>, 10> kAliases{{
    {"object detection", ActionKind::ReferringObjectDetection},
    {"detection", ActionKind::ReferringObjectDetection},
    {"zoom", ActionKind::ZoomIn},
    {"geometric transformation", ActionKind::ZoomIn},
    {"edge", ActionKind::EdgeDetection},
    {"color space conversion", ActionKind::ColorTransform},
    {"colour transform", ActionKind::ColorTransform},
    {"grayscale", ActionKind::ColorTransform},
    {"ruler", ActionKind::SpatialRuler},
    {"dense detection", ActionKind::DenseObjectDetection},
}};

std::string normalize_name(std::string_view name) {
    std::string out;
    bool pending_space = false;
    for (char ch : name) {
        auto c = static_cast<unsigned char>(ch);
        if (std::isspace(c) || ch == '_' || ch == '-') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

} // namespace

std::string_view to_string(ActionKind kind) noexcept {
    for (const auto& n : kActionNames)
        if (n.kind == kind) return n.canonical;
    return "unknown";
}

std::string_view display_name(ActionKind kind) noexcept {
    for (const auto& n : kActionNames)
        if (n.kind == kind) return n.display;
    return "unknown";
}

ActionKind alias_action(std::string_view name) {
    const auto key = normalize_name(name);
    for (const auto& n : kActionNames) {
        if (key == n.display) return n.kind;
    }
    for (const auto& [alias, kind] : kAliases) {
        if (key == alias) return kind;
    }
    throw UnknownAction(std::string(name));
}

bool requires_target(ActionKind kind) noexcept {
    return kind == ActionKind::ReferringObjectDetection || kind == ActionKind::ZoomIn ||
           kind == ActionKind::Segmentation;
}

std::string_view to_string(RationaleMode mode) noexcept {
    switch (mode) {
    case RationaleMode::Hybrid: return "hybrid";
    case RationaleMode::TextOnly: return "text_only";
    case RationaleMode::ZeroShot: return "zero_shot";
    }
    return "hybrid";
}

RationaleMode parse_rationale_mode(std::string_view text) {
    const auto key = normalize_name(text);
    if (key == "hybrid") return RationaleMode::Hybrid;
    if (key == "text only" || key == "textonly") return RationaleMode::TextOnly;
    if (key == "zero shot" || key == "zeroshot") return RationaleMode::ZeroShot;
    throw InvalidArgument(fmt::format("unknown rationale mode '{}'", text));
}

std::vector<std::string> validate_task(const Task& task) {
    std::vector<std::string> violations;
    if (task.id.empty()) violations.emplace_back("task id is empty");

    const auto& img = task.image;
    if (img.width < 1 || img.height < 1) {
        violations.push_back(fmt::format("image dimensions {}x{} must be at least 1x1", img.width, img.height));
    } else if (!img.valid()) {
        violations.push_back(fmt::format("image buffer holds {} bytes, expected {}x{}x{} (channels must be 3 or 4)",
                                         img.pixels.size(), img.width, img.height, img.channels));
    }

    std::set<std::string> seen;
    std::vector<std::string> duplicates;
    for (std::size_t i = 0; i < task.options.size(); ++i) {
        const auto& label = task.options[i].label;
        if (!seen.insert(label).second) {
            duplicates.push_back(label);
            continue;
        }
        const std::string expected(1, static_cast<char>('A' + static_cast<int>(i)));
        if (label != expected)
            violations.push_back(fmt::format("option {} has label '{}', expected '{}'", i + 1, label, expected));
    }
    if (!duplicates.empty()) {
        std::string joined;
        for (const auto& d : duplicates) joined += (joined.empty() ? "" : ", ") + d;
        violations.push_back("duplicate option labels: " + joined);
    }
    return violations;
}

bool aligned(const Plan& plan, const RationaleSeries& series) noexcept {
    if (plan.steps.size() != series.items.size()) return false;
    for (std::size_t i = 0; i < plan.steps.size(); ++i)
        if (plan.steps[i].index != series.items[i].step.index) return false;
    return true;
}

} // namespace vistrace
