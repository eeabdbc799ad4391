#ifndef REFINERKIT_EXTRACT_HPP
#define REFINERKIT_EXTRACT_HPP

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace refinerkit {

// One quoted span with the title of the document it came from.  Position
// within the owning structures is the numbering: groups are majors 1..G,
// items within a group are minors 1..len.
struct ExtractItem {
    std::string title;
    std::string content;
    bool operator==(const ExtractItem&) const = default;
};

// Items that carry the same information (share one major number).
struct SectionGroup {
    std::vector<ExtractItem> items;
    bool operator==(const SectionGroup&) const = default;
};

struct Extract {
    std::vector<SectionGroup> groups;

    bool empty() const { return groups.empty(); }
    std::size_t item_count() const;
    bool operator==(const Extract&) const = default;
};

// Structural well-formedness that the parser guarantees by construction:
// no empty groups, no empty titles/contents, titles are single trimmed
// lines without a leading "## ", contents are trimmed and contain no
// blank line and no line that would itself parse as a section header.
// Returns human-readable complaints, empty when the extract is valid.
std::vector<std::string> validate_extract(const Extract& extract);

enum class ContentStyle { original, quote };
enum class SectionStyle { hierarchy, numbered, star };
enum class TitleStyle { original, markdown, quote };

// One of the 18 surface forms an extract can be rendered into.  The
// canonical form (original content, hierarchy sections, markdown titles)
// is what the parser reads back.
struct StructureTemplate {
    ContentStyle content = ContentStyle::original;
    SectionStyle section = SectionStyle::hierarchy;
    TitleStyle title = TitleStyle::markdown;
    bool operator==(const StructureTemplate&) const = default;
};

StructureTemplate canonical_template();
std::array<StructureTemplate, 18> all_structure_templates();

// Identifier of the form "<content>-<section>-<title>", e.g.
// "original-hierarchy-markdown".
std::string template_id(const StructureTemplate& t);
std::optional<StructureTemplate> parse_template_id(std::string_view id);

enum class ParseErrorKind {
    // Non-blank raw text without a single section header line.
    malformed_output,
    // A header line with no content before the next header or the end.
    dangling_header,
};

struct ParseError {
    ParseErrorKind kind;
    std::string detail;
};

struct ParseResult {
    std::optional<Extract> value;
    std::optional<ParseError> error;
    bool ok() const { return value.has_value(); }
};

// Reads canonical-form text ("M.N. ## Title" headers, records separated by
// blank lines) back into an Extract.  Lines are trimmed, runs of blank
// lines collapse, text before the first header is ignored, and a single
// surrounding ``` fence is dropped.  Majors are renumbered by first
// appearance, minors by order within their group.  Blank input yields an
// empty extract.
ParseResult parse_extract(std::string_view raw);

std::string render_extract(const Extract& extract);
std::string render_extract(const Extract& extract, const StructureTemplate& t);

// Drops section numbering, keeping "## Title" lines and contents.
std::string strip_structure(const Extract& extract);

// Whitespace-normalizes the input, then splits after '.', '!' or '?'
// whenever a space follows.  Joining the pieces with single spaces
// reproduces the normalized input.
std::vector<std::string> segment_sentences(std::string_view text);

}  // namespace refinerkit

#endif
