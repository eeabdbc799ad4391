#include "refinerkit/extract.hpp"

#include <cctype>
#include <charconv>

#include "refinerkit/verbatim.hpp"

namespace refinerkit {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

bool parse_uint(std::string_view s, int& out) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

struct HeaderLine {
    int major = 0;
    std::string title;
};

// Matches "M.N. Title" with an optional "## " before the title.  The line
// is expected to be pre-trimmed.
std::optional<HeaderLine> try_parse_header(std::string_view line) {
    std::size_t dot1 = line.find('.');
    if (dot1 == std::string_view::npos || dot1 == 0) return std::nullopt;
    std::size_t dot2 = line.find('.', dot1 + 1);
    if (dot2 == std::string_view::npos || dot2 == dot1 + 1) return std::nullopt;
    if (dot2 + 1 >= line.size() || !is_space(line[dot2 + 1])) return std::nullopt;
    int major = 0;
    int minor = 0;
    if (!parse_uint(line.substr(0, dot1), major)) return std::nullopt;
    if (!parse_uint(line.substr(dot1 + 1, dot2 - dot1 - 1), minor)) return std::nullopt;
    std::string_view rest = trim(line.substr(dot2 + 1));
    while (rest.starts_with("## ")) rest = trim(rest.substr(3));
    if (rest.empty() || rest == "##") return std::nullopt;
    return HeaderLine{major, std::string(rest)};
}

bool is_fence(std::string_view line) { return line.starts_with("```"); }

}  // namespace

std::size_t Extract::item_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.items.size();
    return n;
}

std::vector<std::string> validate_extract(const Extract& extract) {
    std::vector<std::string> problems;
    for (std::size_t gi = 0; gi < extract.groups.size(); ++gi) {
        const auto& group = extract.groups[gi];
        std::string where = "group " + std::to_string(gi + 1);
        if (group.items.empty()) problems.push_back(where + ": no items");
        for (std::size_t ii = 0; ii < group.items.size(); ++ii) {
            const auto& item = group.items[ii];
            std::string here = where + " item " + std::to_string(ii + 1);
            if (trim(item.title).empty())
                problems.push_back(here + ": empty title");
            else if (std::string_view(item.title) != trim(item.title))
                problems.push_back(here + ": untrimmed title");
            if (item.title.find('\n') != std::string::npos)
                problems.push_back(here + ": title spans lines");
            if (std::string_view(item.title).starts_with("## "))
                problems.push_back(here + ": title keeps a \"## \" marker");
            if (trim(item.content).empty()) {
                problems.push_back(here + ": empty content");
                continue;
            }
            if (std::string_view(item.content) != trim(item.content))
                problems.push_back(here + ": untrimmed content");
            for (std::string_view line : split_lines(item.content)) {
                if (trim(line).empty())
                    problems.push_back(here + ": blank line inside content");
                else if (std::string_view(line) != trim(line))
                    problems.push_back(here + ": untrimmed content line");
                else if (try_parse_header(line))
                    problems.push_back(here + ": content line looks like a section header");
            }
        }
    }
    return problems;
}

StructureTemplate canonical_template() { return StructureTemplate{}; }

std::array<StructureTemplate, 18> all_structure_templates() {
    std::array<StructureTemplate, 18> out{};
    std::size_t i = 0;
    for (ContentStyle c : {ContentStyle::original, ContentStyle::quote})
        for (SectionStyle s : {SectionStyle::hierarchy, SectionStyle::numbered, SectionStyle::star})
            for (TitleStyle t : {TitleStyle::original, TitleStyle::markdown, TitleStyle::quote})
                out[i++] = StructureTemplate{c, s, t};
    return out;
}

std::string template_id(const StructureTemplate& t) {
    std::string id;
    id += t.content == ContentStyle::original ? "original" : "quote";
    id += '-';
    switch (t.section) {
        case SectionStyle::hierarchy: id += "hierarchy"; break;
        case SectionStyle::numbered: id += "numbered"; break;
        case SectionStyle::star: id += "star"; break;
    }
    id += '-';
    switch (t.title) {
        case TitleStyle::original: id += "original"; break;
        case TitleStyle::markdown: id += "markdown"; break;
        case TitleStyle::quote: id += "quote"; break;
    }
    return id;
}

std::optional<StructureTemplate> parse_template_id(std::string_view id) {
    for (const auto& t : all_structure_templates())
        if (template_id(t) == id) return t;
    return std::nullopt;
}

ParseResult parse_extract(std::string_view raw) {
    std::vector<std::string_view> lines;
    for (std::string_view line : split_lines(raw)) lines.push_back(trim(line));
    // Drop one surrounding code fence when the whole output was wrapped in
    // one, which chat models tend to do.
    auto first = lines.begin();
    while (first != lines.end() && first->empty()) ++first;
    if (first != lines.end() && is_fence(*first)) *first = {};
    auto last = lines.rbegin();
    while (last != lines.rend() && last->empty()) ++last;
    if (last != lines.rend() && is_fence(*last)) *last = {};

    struct Record {
        int major;
        std::string title;
        std::vector<std::string_view> content;
    };
    std::vector<Record> records;
    bool saw_text = false;
    for (std::string_view line : lines) {
        if (line.empty()) continue;
        saw_text = true;
        if (auto header = try_parse_header(line)) {
            if (!records.empty() && records.back().content.empty()) {
                return {std::nullopt,
                        ParseError{ParseErrorKind::dangling_header,
                                   "no content under \"" + records.back().title + "\""}};
            }
            records.push_back({header->major, std::move(header->title), {}});
        } else if (!records.empty()) {
            records.back().content.push_back(line);
        }
        // Text before the first header is preamble and is skipped.
    }
    if (records.empty()) {
        if (saw_text)
            return {std::nullopt,
                    ParseError{ParseErrorKind::malformed_output, "no section header found"}};
        return {Extract{}, std::nullopt};
    }
    if (records.back().content.empty())
        return {std::nullopt,
                ParseError{ParseErrorKind::dangling_header,
                           "no content under \"" + records.back().title + "\""}};

    Extract extract;
    std::vector<int> seen_majors;
    for (auto& record : records) {
        std::size_t slot = 0;
        while (slot < seen_majors.size() && seen_majors[slot] != record.major) ++slot;
        if (slot == seen_majors.size()) {
            seen_majors.push_back(record.major);
            extract.groups.emplace_back();
        }
        std::string content;
        for (std::string_view line : record.content) {
            if (!content.empty()) content += '\n';
            content += line;
        }
        extract.groups[slot].items.push_back({std::move(record.title), std::move(content)});
    }
    return {std::move(extract), std::nullopt};
}

std::string render_extract(const Extract& extract) {
    return render_extract(extract, canonical_template());
}

std::string render_extract(const Extract& extract, const StructureTemplate& t) {
    std::string out;
    int running = 0;
    for (std::size_t gi = 0; gi < extract.groups.size(); ++gi) {
        const auto& group = extract.groups[gi];
        for (std::size_t ii = 0; ii < group.items.size(); ++ii) {
            const auto& item = group.items[ii];
            if (!out.empty()) out += "\n\n";
            switch (t.section) {
                case SectionStyle::hierarchy:
                    out += std::to_string(gi + 1) + "." + std::to_string(ii + 1) + ". ";
                    break;
                case SectionStyle::numbered:
                    out += std::to_string(++running) + ". ";
                    break;
                case SectionStyle::star:
                    out += "* ";
                    break;
            }
            switch (t.title) {
                case TitleStyle::original: out += item.title; break;
                case TitleStyle::markdown: out += "## " + item.title; break;
                case TitleStyle::quote: out += "\"" + item.title + "\""; break;
            }
            out += '\n';
            if (t.content == ContentStyle::quote)
                out += "\"" + item.content + "\"";
            else
                out += item.content;
        }
    }
    return out;
}

std::string strip_structure(const Extract& extract) {
    std::string out;
    for (const auto& group : extract.groups) {
        for (const auto& item : group.items) {
            if (!out.empty()) out += "\n\n";
            out += "## " + item.title + "\n" + item.content;
        }
    }
    return out;
}

std::vector<std::string> segment_sentences(std::string_view text) {
    std::string flat = normalize(text);
    std::vector<std::string> sentences;
    std::size_t start = 0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        char c = flat[i];
        bool terminator = c == '.' || c == '!' || c == '?';
        if (terminator && (i + 1 == flat.size() || flat[i + 1] == ' ')) {
            sentences.push_back(flat.substr(start, i + 1 - start));
            start = i + 2;
            i += 1;
        }
    }
    if (start < flat.size()) sentences.push_back(flat.substr(start));
    return sentences;
}

}  // namespace refinerkit
