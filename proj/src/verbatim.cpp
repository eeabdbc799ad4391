#include "refinerkit/verbatim.hpp"

#include <cctype>

namespace refinerkit {

std::string normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += c;
    }
    return out;
}

std::string normalize_casefold(std::string_view text) {
    std::string out = normalize(text);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

bool is_verbatim(std::string_view content, std::span<const DocumentChunk> chunks) {
    std::string needle = normalize(content);
    for (const auto& chunk : chunks) {
        if (normalize(chunk.content).find(needle) != std::string::npos) return true;
    }
    return false;
}

std::vector<bool> verbatim_flags(const Extract& extract,
                                 std::span<const DocumentChunk> chunks) {
    std::vector<bool> flags;
    flags.reserve(extract.item_count());
    for (const auto& group : extract.groups)
        for (const auto& item : group.items)
            flags.push_back(is_verbatim(item.content, chunks));
    return flags;
}

Extract filter_verbatim(const Extract& extract,
                        std::span<const DocumentChunk> chunks) {
    Extract kept;
    for (const auto& group : extract.groups) {
        SectionGroup surviving;
        for (const auto& item : group.items)
            if (is_verbatim(item.content, chunks)) surviving.items.push_back(item);
        if (!surviving.items.empty()) kept.groups.push_back(std::move(surviving));
    }
    return kept;
}

VerbatimReport verbatim_ratio(std::span<const ExtractWithChunks> pairs) {
    VerbatimReport report;
    for (const auto& pair : pairs) {
        for (bool flag : verbatim_flags(pair.extract, pair.chunks)) {
            ++report.total_items;
            if (flag) ++report.verbatim_items;
        }
    }
    report.ratio = report.total_items == 0
                       ? 1.0
                       : static_cast<double>(report.verbatim_items) /
                             static_cast<double>(report.total_items);
    return report;
}

}  // namespace refinerkit
