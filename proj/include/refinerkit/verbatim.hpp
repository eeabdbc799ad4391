#ifndef REFINERKIT_VERBATIM_HPP
#define REFINERKIT_VERBATIM_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refinerkit/extract.hpp"

namespace refinerkit {

// A retrieved passage as handed to the models: document title plus text.
struct DocumentChunk {
    std::string title;
    std::string content;
    bool operator==(const DocumentChunk&) const = default;
};

// Collapses every run of ASCII whitespace to a single space and trims the
// ends.  Idempotent.
std::string normalize(std::string_view text);

// normalize plus ASCII lowercasing, for case-insensitive matching.
std::string normalize_casefold(std::string_view text);

// True when the normalized content occurs, case-sensitively, inside the
// normalized content of at least one chunk.  Titles are not searched.
bool is_verbatim(std::string_view content, std::span<const DocumentChunk> chunks);

// Per-item is_verbatim results, in extract order.
std::vector<bool> verbatim_flags(const Extract& extract,
                                 std::span<const DocumentChunk> chunks);

// Drops items whose content is not verbatim, then empty groups; the
// survivors keep their order and are renumbered by position.
Extract filter_verbatim(const Extract& extract,
                        std::span<const DocumentChunk> chunks);

struct ExtractWithChunks {
    Extract extract;
    std::vector<DocumentChunk> chunks;
};

struct VerbatimReport {
    std::size_t total_items = 0;
    std::size_t verbatim_items = 0;
    // verbatim_items / total_items; 1.0 when there are no items at all.
    double ratio = 1.0;
};

VerbatimReport verbatim_ratio(std::span<const ExtractWithChunks> pairs);

}  // namespace refinerkit

#endif
