// SPDX-License-Identifier: Apache-2.0
#include "vistrace/bench/score.hpp"

#include "vistrace/core/encoding.hpp"
#include "vistrace/core/json.hpp"
#include "vistrace/core/sections.hpp"
#include "vistrace/refiner/refiner.hpp"

#include <algorithm>
#include <regex>
#include <sstream>

#include <fmt/core.h>

namespace vistrace::bench {

using nlohmann::json;

namespace {

json counts_json(const std::map<ActionKind, std::size_t>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[std::string(to_string(k))] = v;
    return j;
}

std::map<ActionKind, std::size_t> counts_from_json(const json& j) {
    std::map<ActionKind, std::size_t> m;
    for (const auto& [k, v] : j.items()) m[alias_action(k)] = v.get<std::size_t>();
    return m;
}

std::string replace_all(std::string text, std::string_view key, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

std::vector<std::string> capabilities_of(const TaskResult& r) {
    if (!r.category) return {category_key(std::nullopt)};
    std::vector<std::string> out;
    std::stringstream in(*r.category);
    std::string tag;
    while (std::getline(in, tag, ',')) {
        auto name = capability_name(tag);
        if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
    }
    if (out.empty()) out.push_back(category_key(std::nullopt));
    return out;
}

double sorted_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum;
}

} // namespace

std::string image_key(const ImageData& image) {
    Sha256 h;
    h.update(fmt::format("{}x{}x{}\n", image.width, image.height, image.channels));
    h.update(std::span<const std::uint8_t>(image.pixels));
    return h.hex_digest();
}

std::string category_key(const std::optional<std::string>& category) {
    return category && !category->empty() ? *category : std::string("uncategorized");
}

void tally(ActionCounts& counts, const std::string& category, const std::vector<ActionKind>& actions) {
    auto& cat = counts.by_category[category];
    for (auto a : actions) {
        ++counts.overall[a];
        ++cat[a];
    }
}

ActionCounts tally_results(const std::vector<TaskResult>& results) {
    ActionCounts counts;
    for (const auto& r : results) tally(counts, category_key(r.category), r.actions);
    return counts;
}

std::vector<std::pair<ActionKind, std::size_t>> sorted_counts(const std::map<ActionKind, std::size_t>& m) {
    std::vector<std::pair<ActionKind, std::size_t>> out(m.begin(), m.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

void to_json(json& j, const ScoreReport& v) {
    json cats = json::array();
    for (const auto& c : v.categories) {
        json row{{"category", c.category}, {"items", c.items}, {"score", c.score}};
        if (c.acc) row["acc"] = *c.acc;
        if (c.acc_plus) row["acc_plus"] = *c.acc_plus;
        cats.push_back(std::move(row));
    }
    json by_cat = json::object();
    for (const auto& [cat, m] : v.actions.by_category) by_cat[cat] = counts_json(m);
    j = json{{"kind", to_string(v.kind)},
             {"categories", std::move(cats)},
             {"aggregate", v.aggregate},
             {"items", v.items},
             {"actions", {{"overall", counts_json(v.actions.overall)}, {"by_category", std::move(by_cat)}}},
             {"metadata",
              {{"mode", v.metadata.mode},
               {"model_id", v.metadata.model_id},
               {"fixture_fingerprint", v.metadata.fixture_fingerprint}}}};
}

void from_json(const json& j, ScoreReport& v) {
    v = ScoreReport{};
    v.kind = parse_benchmark_kind(j.at("kind").get<std::string>());
    for (const auto& row : j.at("categories")) {
        CategoryScore c;
        row.at("category").get_to(c.category);
        row.at("items").get_to(c.items);
        row.at("score").get_to(c.score);
        if (row.contains("acc")) c.acc = row.at("acc").get<double>();
        if (row.contains("acc_plus")) c.acc_plus = row.at("acc_plus").get<double>();
        v.categories.push_back(std::move(c));
    }
    j.at("aggregate").get_to(v.aggregate);
    j.at("items").get_to(v.items);
    const auto& actions = j.at("actions");
    v.actions.overall = counts_from_json(actions.at("overall"));
    for (const auto& [cat, m] : actions.at("by_category").items()) v.actions.by_category[cat] = counts_from_json(m);
    const auto& meta = j.at("metadata");
    meta.at("mode").get_to(v.metadata.mode);
    meta.at("model_id").get_to(v.metadata.model_id);
    meta.at("fixture_fingerprint").get_to(v.metadata.fixture_fingerprint);
}

ScoreReport score_multiple_choice(const std::vector<TaskResult>& results) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> per; // correct, total
    std::size_t correct = 0;
    for (const auto& r : results) {
        if (!r.gold) throw MissingGold(r.task_id);
        const bool ok = r.answer.choice && *r.answer.choice == *r.gold;
        auto& [c, t] = per[category_key(r.category)];
        c += ok ? 1 : 0;
        ++t;
        correct += ok ? 1 : 0;
    }
    ScoreReport report;
    report.kind = BenchmarkKind::MultipleChoice;
    report.items = results.size();
    for (const auto& [cat, ct] : per) {
        report.categories.push_back(
            CategoryScore{cat, ct.second, static_cast<double>(ct.first) / static_cast<double>(ct.second), {}, {}});
    }
    report.aggregate = results.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(results.size());
    report.actions = tally_results(results);
    return report;
}

ScoreReport score_yesno_paired(const std::vector<TaskResult>& results) {
    // category -> image -> per-question correctness
    std::map<std::string, std::map<std::string, std::vector<bool>>> groups;
    for (const auto& r : results) {
        if (!r.gold) throw MissingGold(r.task_id);
        const auto predicted = refiner::normalize_yesno(r.answer.text);
        const bool ok = predicted != refiner::YesNo::Unknown && refiner::to_string(predicted) == *r.gold;
        groups[category_key(r.category)][r.image_key].push_back(ok);
    }
    ScoreReport report;
    report.kind = BenchmarkKind::YesNoPaired;
    report.items = results.size();
    for (const auto& [cat, images] : groups) {
        std::size_t questions = 0;
        std::size_t correct = 0;
        std::size_t both = 0;
        for (const auto& [key, answers] : images) {
            if (answers.size() != 2) throw UnpairedQuestions(key, answers.size());
            questions += 2;
            correct += static_cast<std::size_t>(answers[0]) + static_cast<std::size_t>(answers[1]);
            both += answers[0] && answers[1] ? 1 : 0;
        }
        const double acc = 100.0 * static_cast<double>(correct) / static_cast<double>(questions);
        const double acc_plus = 100.0 * static_cast<double>(both) / static_cast<double>(images.size());
        report.categories.push_back(CategoryScore{cat, questions, acc + acc_plus, acc, acc_plus});
        report.aggregate += acc + acc_plus;
    }
    report.actions = tally_results(results);
    return report;
}

JudgeTemplate load_judge_template(const std::filesystem::path& path) {
    auto sections = load_sections(path);
    JudgeTemplate t{sections["system"], sections["user"]};
    if (t.user.empty()) throw ConfigError(fmt::format("judge template '{}' has no [user]", path.string()));
    return t;
}

std::optional<double> parse_judge_score(std::string_view reply) {
    static const std::regex kNumber(R"([-+]?(?:\d+(?:\.\d*)?|\.\d+))");
    const std::string text(reply);
    std::smatch m;
    if (!std::regex_search(text, m, kNumber)) return std::nullopt;
    const double v = std::stod(m.str());
    if (v < 0.0 || v > 1.0) return std::nullopt;
    return v;
}

ScoreReport score_open_ended_judged(const std::vector<TaskResult>& results, gateway::Gateway& judge,
                                    const JudgeTemplate& tmpl, const gateway::DecodeSettings& settings) {
    // Scores are summed in sorted order so result order cannot change the totals.
    std::map<std::string, std::vector<double>> per;
    std::vector<double> all;
    for (const auto& r : results) {
        if (!r.gold) throw MissingGold(r.task_id);
        double score = 0.0;
        if (!r.error && !r.answer.text.empty()) {
            auto user = replace_all(tmpl.user, "{question}", r.question);
            user = replace_all(std::move(user), "{gold}", *r.gold);
            user = replace_all(std::move(user), "{prediction}", r.answer.text);
            std::vector<gateway::ChatMessage> messages;
            if (!tmpl.system.empty()) messages.push_back(gateway::ChatMessage::system(tmpl.system));
            messages.push_back(gateway::ChatMessage::user({gateway::TextPart{std::move(user)}}));
            const auto reply = judge.complete(messages, settings).response_text;
            const auto parsed = parse_judge_score(reply);
            if (!parsed) throw JudgeParseError(r.task_id, reply);
            score = *parsed;
        }
        all.push_back(score);
        for (const auto& cap : capabilities_of(r)) per[cap].push_back(score);
    }

    ScoreReport report;
    report.kind = BenchmarkKind::OpenEndedJudged;
    report.items = results.size();
    auto emit = [&](const std::string& cat) {
        auto it = per.find(cat);
        if (it == per.end()) return;
        const auto n = it->second.size();
        report.categories.push_back(CategoryScore{cat, n, 100.0 * sorted_sum(it->second) / static_cast<double>(n), {}, {}});
        per.erase(it);
    };
    for (const auto& cat : capability_order()) emit(cat);
    while (!per.empty()) emit(per.begin()->first);
    report.aggregate = results.empty() ? 0.0 : 100.0 * sorted_sum(all) / static_cast<double>(results.size());
    report.actions = tally_results(results);
    return report;
}

} // namespace vistrace::bench
