// SPDX-License-Identifier: Apache-2.0
#pragma once

// Canonical JSON form of the domain types. Images travel as base64 PNG.

#include "vistrace/core/types.hpp"

#include <nlohmann/json.hpp>

namespace vistrace {

void to_json(nlohmann::json& j, const ImageData& v);
void from_json(const nlohmann::json& j, ImageData& v);
void to_json(nlohmann::json& j, const Option& v);
void from_json(const nlohmann::json& j, Option& v);
void to_json(nlohmann::json& j, const Task& v);
void from_json(const nlohmann::json& j, Task& v);
void to_json(nlohmann::json& j, const ActionKind& v);
void from_json(const nlohmann::json& j, ActionKind& v);
void to_json(nlohmann::json& j, const PlanStep& v);
void from_json(const nlohmann::json& j, PlanStep& v);
void to_json(nlohmann::json& j, const Plan& v);
void from_json(const nlohmann::json& j, Plan& v);
void to_json(nlohmann::json& j, const Box& v);
void from_json(const nlohmann::json& j, Box& v);
void to_json(nlohmann::json& j, const VisualRationale& v);
void from_json(const nlohmann::json& j, VisualRationale& v);
void to_json(nlohmann::json& j, const MultimodalRationale& v);
void from_json(const nlohmann::json& j, MultimodalRationale& v);
void to_json(nlohmann::json& j, const RationaleSeries& v);
void from_json(const nlohmann::json& j, RationaleSeries& v);
void to_json(nlohmann::json& j, const RationaleMode& v);
void from_json(const nlohmann::json& j, RationaleMode& v);
void to_json(nlohmann::json& j, const FinalAnswer& v);
void from_json(const nlohmann::json& j, FinalAnswer& v);

/// Task without its pixels; the image is stored beside the manifest.
[[nodiscard]] nlohmann::json task_snapshot(const Task& task);

} // namespace vistrace
