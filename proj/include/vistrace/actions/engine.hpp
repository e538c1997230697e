// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/actions/ops.hpp"
#include "vistrace/core/types.hpp"
#include "vistrace/tools/client.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vistrace::actions {

struct ActionConfig {
    int edge_threshold = kDefaultEdgeThreshold;
    double zoom_margin = kDefaultZoomMargin;
    double zoom_upscale = 2.0;
    int zoom_max_side = kDefaultZoomMaxSide;
    int axis_stroke = 2;
    int box_stroke = 3;
    std::vector<Rgb> palette = default_palette();
};

struct ActionOutcome {
    VisualRationale visual;
    bool degraded = false;
    std::optional<std::string> note;
};

struct ToolResult {
    ImageData image;
    std::vector<Box> boxes;
};

/// Runs a detection or segmentation step through the tool client. Detection
/// boxes are drawn onto the image; segmentation returns the tool's overlay.
/// Throws ToolError.
[[nodiscard]] ToolResult segment_or_detect(const PlanStep& step, const ImageData& image, tools::ToolClient& tools,
                                           const ActionConfig& config = {});

/// Produces the visual rationale for one plan step. Tool failures never
/// throw: they yield the original image with degraded = true. Invalid steps
/// or images throw InvalidArgument; an empty zoom region throws DegenerateBox.
[[nodiscard]] ActionOutcome execute(const PlanStep& step, const ImageData& image, tools::ToolClient& tools,
                                    const ActionConfig& config = {});

} // namespace vistrace::actions
