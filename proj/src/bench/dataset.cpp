// SPDX-License-Identifier: Apache-2.0
#include "vistrace/bench/dataset.hpp"

#include "vistrace/core/sections.hpp"
#include "vistrace/image/codec.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include <fmt/core.h>

namespace vistrace::bench {

namespace {

constexpr std::array<std::string_view, 4> kOptionColumns{"A", "B", "C", "D"};

std::string normalize(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '-' || c == ' ') c = '_';
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

struct Row {
    std::size_t line;
    std::map<std::string, std::string> cells;

    [[nodiscard]] std::string get(const std::string& column) const {
        auto it = cells.find(column);
        return it == cells.end() ? std::string() : trim(it->second);
    }
};

std::vector<Row> read_tsv(const std::filesystem::path& path, const std::vector<std::string>& required) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line)) throw FormatError(1, "empty file, expected a header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split_tabs(line);
    for (auto& h : header) h = trim(h);
    for (const auto& col : required) {
        if (std::find(header.begin(), header.end(), col) == header.end())
            throw FormatError(1, fmt::format("missing column '{}'", col));
    }

    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_tabs(line);
        if (cells.size() != header.size())
            throw FormatError(line_no, fmt::format("{} fields, header has {}", cells.size(), header.size()));
        Row row{line_no, {}};
        for (std::size_t i = 0; i < header.size(); ++i) row.cells[header[i]] = std::move(cells[i]);
        rows.push_back(std::move(row));
    }
    return rows;
}

Task base_task(const Row& row, std::set<std::string>& seen) {
    Task task;
    task.id = row.get("index");
    if (task.id.empty()) throw FormatError(row.line, "blank index");
    if (!seen.insert(task.id).second) throw FormatError(row.line, fmt::format("duplicate index '{}'", task.id));
    task.question = row.get("question");
    if (task.question.empty()) throw FormatError(row.line, "blank question");
    const auto b64 = row.get("image");
    if (b64.empty()) throw FormatError(row.line, "blank image");
    try {
        task.image = image::from_base64(b64);
    } catch (const Error& e) {
        throw FormatError(row.line, fmt::format("undecodable image: {}", e.what()));
    }
    if (auto cat = row.get("category"); !cat.empty()) task.category = cat;
    return task;
}

void check(const Task& task, std::size_t line) {
    const auto problems = validate_task(task);
    if (!problems.empty()) throw FormatError(line, problems.front());
}

std::string image_cell(const ImageData& img) { return image::to_png_base64(img); }

void reject_tabs(const std::string& s, const std::string& id) {
    if (s.find_first_of("\t\r\n") != std::string::npos)
        throw InvalidArgument(fmt::format("task '{}': field contains a tab or newline", id));
}

} // namespace

std::string_view to_string(BenchmarkKind kind) noexcept {
    switch (kind) {
    case BenchmarkKind::MultipleChoice: return "multiple_choice";
    case BenchmarkKind::YesNoPaired: return "yes_no_paired";
    case BenchmarkKind::OpenEndedJudged: return "open_ended_judged";
    }
    return "multiple_choice";
}

BenchmarkKind parse_benchmark_kind(std::string_view text) {
    const auto n = normalize(text);
    if (n == "multiple_choice" || n == "mc" || n == "mmbench") return BenchmarkKind::MultipleChoice;
    if (n == "yes_no_paired" || n == "yes_no" || n == "yesno" || n == "mme") return BenchmarkKind::YesNoPaired;
    if (n == "open_ended_judged" || n == "judged" || n == "open_ended" || n == "mmvet")
        return BenchmarkKind::OpenEndedJudged;
    throw InvalidArgument(fmt::format("unknown benchmark kind '{}'", text));
}

const std::vector<std::string>& capability_order() {
    static const std::vector<std::string> kOrder{"Recognition",         "OCR",               "Knowledge",
                                                 "Language Generation", "Spatial Awareness", "Math"};
    return kOrder;
}

std::string capability_name(std::string_view tag) {
    static const std::map<std::string, std::string> kTags{
        {"rec", "Recognition"},          {"ocr", "OCR"},  {"know", "Knowledge"}, {"gen", "Language Generation"},
        {"spat", "Spatial Awareness"}, {"math", "Math"},
    };
    const auto n = normalize(trim(tag));
    if (auto it = kTags.find(n); it != kTags.end()) return it->second;
    for (const auto& name : capability_order()) {
        if (normalize(name) == n) return name;
    }
    throw InvalidArgument(fmt::format("unknown capability '{}'", tag));
}

std::vector<Task> load_multiple_choice(const std::filesystem::path& path) {
    std::vector<Task> tasks;
    std::set<std::string> seen;
    for (const auto& row : read_tsv(path, {"index", "question", "A", "B", "answer", "image"})) {
        Task task = base_task(row, seen);
        for (auto col : kOptionColumns) {
            auto text = row.get(std::string(col));
            if (!text.empty()) task.options.push_back(Option{std::string(col), std::move(text)});
        }
        if (task.options.size() < 2) throw FormatError(row.line, "fewer than two options");
        if (auto gold = row.get("answer"); !gold.empty()) {
            const bool known = std::any_of(task.options.begin(), task.options.end(),
                                           [&](const Option& o) { return o.label == gold; });
            if (!known) throw FormatError(row.line, fmt::format("answer '{}' is not an option label", gold));
            task.gold_answer = gold;
        }
        check(task, row.line);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::vector<Task> load_yes_no(const std::filesystem::path& path) {
    std::vector<Task> tasks;
    std::set<std::string> seen;
    for (const auto& row : read_tsv(path, {"index", "question", "answer", "image"})) {
        Task task = base_task(row, seen);
        if (auto gold = normalize(row.get("answer")); !gold.empty()) {
            if (gold != "yes" && gold != "no") throw FormatError(row.line, fmt::format("answer '{}' is not yes/no", gold));
            task.gold_answer = gold;
        }
        check(task, row.line);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::vector<Task> load_open_ended(const std::filesystem::path& path) {
    std::vector<Task> tasks;
    std::set<std::string> seen;
    for (const auto& row : read_tsv(path, {"index", "question", "answer", "image"})) {
        Task task = base_task(row, seen);
        if (auto gold = row.get("answer"); !gold.empty()) task.gold_answer = gold;
        if (task.category) {
            std::stringstream in(*task.category);
            std::string tag;
            while (std::getline(in, tag, ',')) {
                try {
                    (void)capability_name(tag);
                } catch (const InvalidArgument& e) {
                    throw FormatError(row.line, e.what());
                }
            }
        }
        check(task, row.line);
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::vector<Task> load_dataset(const std::filesystem::path& path, BenchmarkKind kind) {
    switch (kind) {
    case BenchmarkKind::MultipleChoice: return load_multiple_choice(path);
    case BenchmarkKind::YesNoPaired: return load_yes_no(path);
    case BenchmarkKind::OpenEndedJudged: return load_open_ended(path);
    }
    return {};
}

std::string render_dataset(const std::vector<Task>& tasks, BenchmarkKind kind) {
    const bool mc = kind == BenchmarkKind::MultipleChoice;
    std::string out = mc ? "index\tquestion\tA\tB\tC\tD\tanswer\tcategory\timage\n"
                         : "index\tquestion\tanswer\tcategory\timage\n";
    for (const auto& t : tasks) {
        std::vector<std::string> cells{t.id, t.question};
        if (mc) {
            if (t.options.size() > kOptionColumns.size())
                throw InvalidArgument(fmt::format("task '{}' has more than 4 options", t.id));
            for (auto col : kOptionColumns) {
                auto it = std::find_if(t.options.begin(), t.options.end(),
                                       [&](const Option& o) { return o.label == col; });
                cells.push_back(it == t.options.end() ? std::string() : it->text);
            }
        }
        cells.push_back(t.gold_answer.value_or(""));
        cells.push_back(t.category.value_or(""));
        for (const auto& c : cells) reject_tabs(c, t.id);
        cells.push_back(image_cell(t.image));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += '\t';
            out += cells[i];
        }
        out += '\n';
    }
    return out;
}

} // namespace vistrace::bench
