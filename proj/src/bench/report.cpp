// SPDX-License-Identifier: Apache-2.0
#include "vistrace/bench/report.hpp"

#include <fstream>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

namespace vistrace::bench {

using nlohmann::json;

namespace {

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string md_cell(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

std::string full(double v) { return json(v).dump(); }

std::string score_label(BenchmarkKind kind) {
    switch (kind) {
    case BenchmarkKind::MultipleChoice: return "Accuracy (%)";
    case BenchmarkKind::YesNoPaired: return "Score";
    case BenchmarkKind::OpenEndedJudged: return "Score";
    }
    return "Score";
}

double shown(BenchmarkKind kind, double v) { return kind == BenchmarkKind::MultipleChoice ? 100.0 * v : v; }

json counts_object(const std::map<ActionKind, std::size_t>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[std::string(to_string(k))] = v;
    return j;
}

std::string markdown_actions(const ActionCounts& counts) {
    std::string out = "| Action | Count |\n|---|---:|\n";
    for (const auto& [action, n] : sorted_counts(counts.overall))
        out += fmt::format("| {} | {} |\n", display_name(action), n);
    for (const auto& [cat, m] : counts.by_category) {
        out += fmt::format("\n**{}**\n\n| Action | Count |\n|---|---:|\n", md_cell(cat));
        for (const auto& [action, n] : sorted_counts(m)) out += fmt::format("| {} | {} |\n", display_name(action), n);
    }
    return out;
}

} // namespace

std::string_view to_string(ReportFormat f) noexcept {
    switch (f) {
    case ReportFormat::Json: return "json";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Markdown: return "markdown";
    }
    return "json";
}

ReportFormat parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::Json;
    if (text == "csv") return ReportFormat::Csv;
    if (text == "markdown" || text == "md") return ReportFormat::Markdown;
    throw InvalidArgument(fmt::format("unknown report format '{}'", text));
}

std::string_view file_extension(ReportFormat f) noexcept {
    switch (f) {
    case ReportFormat::Json: return ".json";
    case ReportFormat::Csv: return ".csv";
    case ReportFormat::Markdown: return ".md";
    }
    return ".txt";
}

std::string emit_report(const ScoreReport& report, ReportFormat format) {
    const bool paired = report.kind == BenchmarkKind::YesNoPaired;
    switch (format) {
    case ReportFormat::Json: return json(report).dump(2) + "\n";

    case ReportFormat::Csv: {
        std::string out = paired ? "category,items,score,acc,acc_plus\n" : "category,items,score\n";
        for (const auto& c : report.categories) {
            out += fmt::format("{},{},{}", csv_field(c.category), c.items, full(c.score));
            if (paired) out += fmt::format(",{},{}", full(c.acc.value_or(0.0)), full(c.acc_plus.value_or(0.0)));
            out += '\n';
        }
        out += fmt::format("total,{},{}", report.items, full(report.aggregate));
        if (paired) out += ",,";
        out += '\n';
        return out;
    }

    case ReportFormat::Markdown: {
        std::string out = fmt::format("# {} report\n\n", to_string(report.kind));
        out += fmt::format("- mode: {}\n- model: {}\n- fixtures: {}\n\n", report.metadata.mode,
                           report.metadata.model_id.empty() ? "-" : report.metadata.model_id,
                           report.metadata.fixture_fingerprint.empty() ? "-" : report.metadata.fixture_fingerprint);
        if (paired) {
            out += "| Category | Questions | acc | acc+ | Score |\n|---|---:|---:|---:|---:|\n";
            for (const auto& c : report.categories) {
                out += fmt::format("| {} | {} | {:.1f} | {:.1f} | {:.1f} |\n", md_cell(c.category), c.items,
                                   c.acc.value_or(0.0), c.acc_plus.value_or(0.0), c.score);
            }
            out += fmt::format("| Total | {} | | | {:.1f} |\n", report.items, report.aggregate);
        } else {
            out += fmt::format("| Category | Items | {} |\n|---|---:|---:|\n", score_label(report.kind));
            for (const auto& c : report.categories)
                out += fmt::format("| {} | {} | {:.1f} |\n", md_cell(c.category), c.items, shown(report.kind, c.score));
            out += fmt::format("| Total | {} | {:.1f} |\n", report.items, shown(report.kind, report.aggregate));
        }
        out += "\n## Actions\n\n" + markdown_actions(report.actions);
        return out;
    }
    }
    return {};
}

std::string emit_action_counts(const ActionCounts& counts, ReportFormat format) {
    switch (format) {
    case ReportFormat::Json: {
        json by_cat = json::object();
        for (const auto& [cat, m] : counts.by_category) by_cat[cat] = counts_object(m);
        json ranked = json::array();
        for (const auto& [action, n] : sorted_counts(counts.overall))
            ranked.push_back({{"action", to_string(action)}, {"count", n}});
        return json{{"overall", counts_object(counts.overall)}, {"ranked", ranked}, {"by_category", by_cat}}.dump(2) +
               "\n";
    }
    case ReportFormat::Csv: {
        std::string out = "scope,action,count\n";
        for (const auto& [action, n] : sorted_counts(counts.overall))
            out += fmt::format("overall,{},{}\n", to_string(action), n);
        for (const auto& [cat, m] : counts.by_category) {
            for (const auto& [action, n] : sorted_counts(m))
                out += fmt::format("{},{},{}\n", csv_field(cat), to_string(action), n);
        }
        return out;
    }
    case ReportFormat::Markdown: return "# Action usage\n\n" + markdown_actions(counts);
    }
    return {};
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.close();
    if (!out) throw IoError(fmt::format("short write to '{}'", path.string()));
}

} // namespace vistrace::bench
