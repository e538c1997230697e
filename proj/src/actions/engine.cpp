// SPDX-License-Identifier: Apache-2.0
#include "vistrace/actions/engine.hpp"

#include "vistrace/image/codec.hpp"

#include <algorithm>

#include <fmt/core.h>

namespace vistrace::actions {

namespace {

void validate_step(const PlanStep& step, const ImageData& image) {
    if (!image.valid()) throw InvalidArgument(fmt::format("step {}: invalid image", step.index));
    if (requires_target(step.action) && (!step.target || step.target->empty()))
        throw InvalidArgument(fmt::format("step {}: {} needs a target", step.index, display_name(step.action)));
}

std::optional<Box> box_override(const PlanStep& step) {
    const auto& p = step.params;
    auto get = [&](const char* key) -> std::optional<double> {
        if (auto it = p.find(key); it != p.end()) return it->second;
        return std::nullopt;
    };
    const auto x0 = get("x0"), y0 = get("y0"), x1 = get("x1"), y1 = get("y1");
    if (!x0 || !y0 || !x1 || !y1) return std::nullopt;
    Box b{*x0, *y0, *x1, *y1, 1.0, step.target.value_or("")};
    if (!b.valid()) throw InvalidArgument(fmt::format("step {}: bbox override is not a valid box", step.index));
    return b;
}

ActionOutcome degraded(const PlanStep& step, const ImageData& image, const tools::ToolError& err) {
    ActionOutcome out;
    out.visual = VisualRationale{image, step.action, std::nullopt,
                                 fmt::format("tool unavailable ({}): {} could not run; original image shown",
                                             tools::to_string(err.kind()), display_name(step.action))};
    out.degraded = true;
    out.note = err.what();
    return out;
}

std::string target_or_all(const PlanStep& step) {
    return step.target && !step.target->empty() ? *step.target : std::string("all salient objects");
}

} // namespace

ToolResult segment_or_detect(const PlanStep& step, const ImageData& image, tools::ToolClient& tools,
                             const ActionConfig& config) {
    switch (step.action) {
    case ActionKind::ReferringObjectDetection:
    case ActionKind::DenseObjectDetection: {
        const bool dense = step.action == ActionKind::DenseObjectDetection;
        const auto req = tools::make_request(dense ? tools::ToolAction::DetectDense : tools::ToolAction::DetectReferring,
                                             image, dense ? std::nullopt : step.target);
        auto resp = tools.call(req);
        if (!resp.has_boxes())
            throw tools::ToolError(tools::ToolError::Kind::MalformedResponse, "detection returned no boxes field");
        auto boxes = resp.boxes();
        return {draw_boxes(image, boxes, config.box_stroke, config.palette), std::move(boxes)};
    }
    case ActionKind::Segmentation: {
        const auto resp = tools.call(tools::make_request(tools::ToolAction::Segment, image, step.target));
        if (resp.has_boxes())
            throw tools::ToolError(tools::ToolError::Kind::MalformedResponse, "segmentation returned boxes");
        ImageData overlay;
        try {
            overlay = image::from_base64(resp.overlay().image_png_b64);
        } catch (const Error& e) {
            throw tools::ToolError(tools::ToolError::Kind::MalformedResponse, e.what());
        }
        if (overlay.width != image.width || overlay.height != image.height)
            throw tools::ToolError(tools::ToolError::Kind::MalformedResponse,
                                   fmt::format("overlay is {}x{}, input was {}x{}", overlay.width, overlay.height,
                                               image.width, image.height));
        return {std::move(overlay), {}};
    }
    default:
        throw InvalidArgument(fmt::format("{} is not a tool-backed action", display_name(step.action)));
    }
}

ActionOutcome execute(const PlanStep& step, const ImageData& image, tools::ToolClient& tools,
                      const ActionConfig& config) {
    validate_step(step, image);
    ActionOutcome out;
    out.visual.producer = step.action;

    switch (step.action) {
    case ActionKind::ColorTransform:
        out.visual.image = color_transform(image);
        out.visual.caption = "converted to grayscale";
        return out;

    case ActionKind::EdgeDetection:
        out.visual.image = edge_detect(image, config.edge_threshold);
        out.visual.caption = fmt::format("Sobel edge map, threshold {}", config.edge_threshold);
        return out;

    case ActionKind::SpatialRuler:
        out.visual.image = spatial_ruler(image, config.axis_stroke);
        out.visual.caption = "axes through the centre; Q1 top-left, Q2 top-right, Q3 bottom-right, Q4 bottom-left";
        return out;

    case ActionKind::ReferringObjectDetection:
    case ActionKind::DenseObjectDetection:
    case ActionKind::Segmentation: {
        try {
            auto result = segment_or_detect(step, image, tools, config);
            out.visual.image = std::move(result.image);
            if (step.action == ActionKind::Segmentation) {
                out.visual.caption = fmt::format("segmentation mask overlay for '{}'", *step.target);
            } else {
                out.visual.caption = fmt::format("{} box(es) drawn for '{}'", result.boxes.size(), target_or_all(step));
                out.visual.annotations = std::move(result.boxes);
            }
            return out;
        } catch (const tools::ToolError& e) {
            return degraded(step, image, e);
        }
    }

    case ActionKind::ZoomIn: {
        std::optional<Box> region;
        try {
            region = box_override(step);
            if (!region) {
                const auto resp = tools.call(tools::make_request(tools::ToolAction::DetectReferring, image, step.target));
                if (!resp.has_boxes())
                    throw tools::ToolError(tools::ToolError::Kind::MalformedResponse, "detection returned no boxes");
                const auto& boxes = resp.boxes();
                // Highest score wins; ties keep the earliest box.
                const auto best = std::max_element(boxes.begin(), boxes.end(),
                                                   [](const Box& a, const Box& b) { return a.score < b.score; });
                if (best != boxes.end()) region = *best;
            }
        } catch (const tools::ToolError& e) {
            return degraded(step, image, e);
        }
        if (!region) {
            out.visual.image = image;
            out.visual.caption = fmt::format("'{}' not found; full frame shown", *step.target);
            out.note = "detector returned no boxes";
            return out;
        }
        out.visual.image = zoom_crop(image, *region, config.zoom_upscale, config.zoom_margin, config.zoom_max_side);
        out.visual.annotations = std::vector<Box>{*region};
        out.visual.caption = fmt::format("zoomed x{} on '{}'", config.zoom_upscale, *step.target);
        return out;
    }
    }
    throw InvalidArgument("unhandled action");
}

} // namespace vistrace::actions
