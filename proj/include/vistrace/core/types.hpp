// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vistrace {

/// Row-major 8-bit raster with 3 (RGB) or 4 (RGBA) interleaved channels.
struct ImageData {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<std::uint8_t> pixels;

    ImageData() = default;
    ImageData(int w, int h, int c = 3);
    ImageData(int w, int h, int c, std::vector<std::uint8_t> data);

    /// Solid image filled with one colour (alpha 255 when channels == 4).
    static ImageData filled(int w, int h, std::array<std::uint8_t, 3> rgb, int c = 3);

    [[nodiscard]] bool valid() const noexcept;
    [[nodiscard]] std::size_t offset(int x, int y) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels);
    }
    [[nodiscard]] std::uint8_t* at(int x, int y) noexcept { return pixels.data() + offset(x, y); }
    [[nodiscard]] const std::uint8_t* at(int x, int y) const noexcept { return pixels.data() + offset(x, y); }

    bool operator==(const ImageData&) const = default;
};

struct Option {
    std::string label;
    std::string text;

    bool operator==(const Option&) const = default;
};

/// One visual question: the unit of evaluation.
struct Task {
    std::string id;
    std::string question;
    ImageData image;
    std::vector<Option> options;
    std::optional<std::string> gold_answer;
    std::optional<std::string> category;

    bool operator==(const Task&) const = default;
};

enum class ActionKind {
    Segmentation,
    EdgeDetection,
    ZoomIn,
    DenseObjectDetection,
    ReferringObjectDetection,
    SpatialRuler,
    ColorTransform,
};

inline constexpr std::array<ActionKind, 7> kAllActions{
    ActionKind::Segmentation,         ActionKind::EdgeDetection,
    ActionKind::ZoomIn,               ActionKind::DenseObjectDetection,
    ActionKind::ReferringObjectDetection, ActionKind::SpatialRuler,
    ActionKind::ColorTransform,
};

/// Canonical snake_case name, e.g. "referring_object_detection".
[[nodiscard]] std::string_view to_string(ActionKind kind) noexcept;

/// Human-facing name used in prompts and tables, e.g. "referring object detection".
[[nodiscard]] std::string_view display_name(ActionKind kind) noexcept;

/// Resolves canonical names and the coarse aliases ("object detection",
/// "zoom in", ...). Case, whitespace, '-' and '_' are ignored.
/// Throws UnknownAction.
[[nodiscard]] ActionKind alias_action(std::string_view name);

/// Actions whose step must name a target phrase.
[[nodiscard]] bool requires_target(ActionKind kind) noexcept;

struct PlanStep {
    int index = 0;
    std::string subgoal;
    ActionKind action = ActionKind::ReferringObjectDetection;
    std::optional<std::string> target;
    std::map<std::string, double> params;

    bool operator==(const PlanStep&) const = default;
};

struct Plan {
    std::vector<PlanStep> steps;
    std::string raw_model_text;
    std::vector<std::string> warnings;

    bool operator==(const Plan&) const = default;
};

inline constexpr std::size_t kDefaultMaxSteps = 6;

/// Normalized box, coordinates in [0,1].
struct Box {
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 0.0;
    double y1 = 0.0;
    double score = 0.0;
    std::string label;

    [[nodiscard]] bool valid() const noexcept;
    bool operator==(const Box&) const = default;
};

struct VisualRationale {
    ImageData image;
    ActionKind producer = ActionKind::ColorTransform;
    std::optional<std::vector<Box>> annotations;
    std::string caption;

    bool operator==(const VisualRationale&) const = default;
};

/// One step of the rationale chain: the sub-goal, its processed image and
/// the model's reasoning about it.
struct MultimodalRationale {
    PlanStep step;
    std::optional<VisualRationale> visual;
    std::string textual;
    bool degraded = false;
    std::optional<std::string> failure;

    bool operator==(const MultimodalRationale&) const = default;
};

struct RationaleSeries {
    std::vector<MultimodalRationale> items;

    bool operator==(const RationaleSeries&) const = default;
};

enum class RationaleMode { Hybrid, TextOnly, ZeroShot };

[[nodiscard]] std::string_view to_string(RationaleMode mode) noexcept;
/// Accepts "hybrid", "text-only"/"text_only", "zero-shot"/"zero_shot".
[[nodiscard]] RationaleMode parse_rationale_mode(std::string_view text);

struct FinalAnswer {
    std::string text;
    std::optional<std::string> choice;
    RationaleMode mode = RationaleMode::Hybrid;
    bool fallback = false;

    bool operator==(const FinalAnswer&) const = default;
};

/// Returns one human-readable entry per violated Task invariant.
[[nodiscard]] std::vector<std::string> validate_task(const Task& task);

/// Index alignment between a plan and its series.
[[nodiscard]] bool aligned(const Plan& plan, const RationaleSeries& series) noexcept;

} // namespace vistrace
