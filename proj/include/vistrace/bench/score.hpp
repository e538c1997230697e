// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vistrace/bench/dataset.hpp"
#include "vistrace/core/error.hpp"
#include "vistrace/core/types.hpp"
#include "vistrace/gateway/gateway.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace vistrace::bench {

class MissingGold : public Error {
public:
    explicit MissingGold(const std::string& task_id) : Error("task '" + task_id + "' has no gold answer") {}
};

class UnpairedQuestions : public Error {
public:
    UnpairedQuestions(const std::string& image_key, std::size_t count)
        : Error("image " + image_key + " has " + std::to_string(count) + " question(s); expected 2"),
          image_key_(image_key) {}
    [[nodiscard]] const std::string& image_key() const noexcept { return image_key_; }

private:
    std::string image_key_;
};

class JudgeParseError : public Error {
public:
    JudgeParseError(const std::string& task_id, const std::string& reply)
        : Error("judge reply for '" + task_id + "' has no score in [0,1]: " + reply), task_id_(task_id) {}
    [[nodiscard]] const std::string& task_id() const noexcept { return task_id_; }

private:
    std::string task_id_;
};

/// Everything scoring and statistics need from one answered task.
struct TaskResult {
    std::string task_id;
    std::string question;
    std::vector<Option> options;
    std::optional<std::string> category;
    std::optional<std::string> gold;
    /// Digest of the question image's pixels; pairs yes/no questions.
    std::string image_key;
    FinalAnswer answer;
    /// Planned actions in step order (empty for zero-shot and fallbacks).
    std::vector<ActionKind> actions;
    /// Set when the task could not be answered at all.
    std::optional<std::string> error;

    bool operator==(const TaskResult&) const = default;
};

/// Digest used as TaskResult::image_key.
[[nodiscard]] std::string image_key(const ImageData& image);

/// Category used for grouping and action statistics ("uncategorized" when absent).
[[nodiscard]] std::string category_key(const std::optional<std::string>& category);

struct ActionCounts {
    std::map<ActionKind, std::size_t> overall;
    std::map<std::string, std::map<ActionKind, std::size_t>> by_category;

    bool operator==(const ActionCounts&) const = default;
};

/// Adds one task's planned actions under its category.
void tally(ActionCounts& counts, const std::string& category, const std::vector<ActionKind>& actions);
[[nodiscard]] ActionCounts tally_results(const std::vector<TaskResult>& results);

/// (action, count) pairs sorted by count descending, then action order.
[[nodiscard]] std::vector<std::pair<ActionKind, std::size_t>> sorted_counts(const std::map<ActionKind, std::size_t>& m);

struct CategoryScore {
    std::string category;
    std::size_t items = 0;
    /// Accuracy in [0,1] (multiple choice), acc + acc_plus in [0,200]
    /// (yes/no pairs) or mean judge score x 100 (judged).
    double score = 0.0;
    /// Yes/no pairs only, both in [0,100].
    std::optional<double> acc;
    std::optional<double> acc_plus;

    bool operator==(const CategoryScore&) const = default;
};

struct RunMetadata {
    std::string mode;
    std::string model_id;
    std::string fixture_fingerprint;

    bool operator==(const RunMetadata&) const = default;
};

struct ScoreReport {
    BenchmarkKind kind = BenchmarkKind::MultipleChoice;
    std::vector<CategoryScore> categories;
    /// Overall accuracy, sum of category scores, or mean judge score x 100.
    double aggregate = 0.0;
    std::size_t items = 0;
    ActionCounts actions;
    RunMetadata metadata;

    bool operator==(const ScoreReport&) const = default;
};

void to_json(nlohmann::json& j, const ScoreReport& v);
void from_json(const nlohmann::json& j, ScoreReport& v);

/// accuracy = correct / total, overall and per category (sorted by name).
/// An absent choice counts as wrong. Throws MissingGold.
[[nodiscard]] ScoreReport score_multiple_choice(const std::vector<TaskResult>& results);

/// Per category: acc = 100 x correct / questions, acc_plus = 100 x images
/// with both answers correct / images, score = acc + acc_plus; the aggregate
/// is the sum over categories. An unknown answer counts as wrong.
/// Throws MissingGold or UnpairedQuestions.
[[nodiscard]] ScoreReport score_yesno_paired(const std::vector<TaskResult>& results);

struct JudgeTemplate {
    std::string system;
    /// May reference {question}, {gold} and {prediction}.
    std::string user;
};

/// Reads `[system]` and `[user]` sections.
[[nodiscard]] JudgeTemplate load_judge_template(const std::filesystem::path& path);

/// First number in the reply; nullopt when absent or outside [0,1].
[[nodiscard]] std::optional<double> parse_judge_score(std::string_view reply);

/// Each item's judge score in [0,1] comes from one text-only request; an
/// item with an empty prediction scores 0 without a request. Items count
/// toward every capability they carry. Category score = mean x 100;
/// aggregate = mean over all items x 100. Throws JudgeParseError.
[[nodiscard]] ScoreReport score_open_ended_judged(const std::vector<TaskResult>& results, gateway::Gateway& judge,
                                                  const JudgeTemplate& tmpl,
                                                  const gateway::DecodeSettings& settings = {});

} // namespace vistrace::bench
