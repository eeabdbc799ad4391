#ifndef REFINERKIT_CURATOR_HPP
#define REFINERKIT_CURATOR_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "refinerkit/extract.hpp"
#include "refinerkit/model_client.hpp"
#include "refinerkit/verbatim.hpp"

namespace refinerkit {

enum class Task {
    popqa,
    triviaqa,
    arc_challenge,
    hotpotqa,
    twowiki,
    pubhealth,
    other,
};

std::string to_string(Task task);
Task task_from_string(std::string_view name);  // unknown names map to other

struct QuerySample {
    std::string id;
    std::string query;
    std::vector<DocumentChunk> chunks;
    std::vector<std::string> answers;
    Task task = Task::other;
};

// Which teacher prompt a task uses.
std::string default_task_template(Task task);

struct TeacherOutput {
    std::string teacher;  // endpoint name
    std::string raw;
    ParseResult parsed;
    std::optional<EndpointError> endpoint_error;
};

// Fans the sample's teacher prompt out to every endpoint (one thread per
// teacher) and parses what comes back.  Outputs line up with the endpoint
// order; failed calls still occupy their slot so the teacher count stays
// fixed.  template_override replaces the task's default teacher prompt.
std::vector<TeacherOutput> collect_teacher_outputs(const QuerySample& sample,
                                                   std::span<const EndpointConfig> teachers,
                                                   CompletionClient& client,
                                                   const PromptTemplateStore& templates,
                                                   std::string_view template_override = {});

struct VoteEntry {
    std::string sentence;            // normalized
    std::vector<std::size_t> supporters;  // teacher indexes, ascending
};

// Sentences in first-appearance order.  A teacher supports a sentence at
// most once however often it repeats it.
struct VoteTally {
    std::vector<VoteEntry> entries;
    const VoteEntry* find(std::string_view sentence) const;
};

// Splits every verbatim item of every parsed output into sentences and
// counts supporting teachers per normalized sentence.
VoteTally tally_votes(std::span<const TeacherOutput> outputs,
                      std::span<const DocumentChunk> chunks);

// Sentences backed by a strict majority (count > teacher_count / 2), in
// tally order.
std::vector<std::string> select_majority(const VoteTally& tally,
                                         std::size_t teacher_count);

// Rebuilds an extract holding exactly the kept sentences.  The section
// skeleton comes from the teacher whose verbatim-filtered output retains
// the most kept sentences (ties go to the earlier endpoint); its items are
// cut down to kept sentences, empties dropped, numbering rebuilt.
Extract assign_sections(const std::vector<std::string>& kept,
                        std::span<const TeacherOutput> outputs,
                        std::span<const DocumentChunk> chunks);

struct SFTRecord {
    std::string sample_id;
    std::string prompt;  // rendered refiner_infer prompt
    std::string target;  // canonical rendering of the curated extract
};

SFTRecord build_sft_record(const QuerySample& sample, const Extract& curated,
                           const PromptTemplateStore& templates);

// Per-sample curation trace for the run log.
struct CurationLog {
    struct TeacherTrace {
        std::string teacher;
        std::string status;  // "ok" or the error that replaced the extract
        std::size_t items = 0;
        std::size_t verbatim_items = 0;
        std::size_t retained_kept = 0;
    };
    std::string sample_id;
    std::vector<TeacherTrace> teachers;
    std::vector<std::string> kept;
    std::string reference_teacher;
    std::size_t guard_dropped_items = 0;
};

struct CurationOutcome {
    Extract curated;
    SFTRecord record;
    CurationLog log;
};

// One sample through the whole pipeline: fan-out, parse, verbatim filter,
// vote, assign, render.  A final verbatim re-check guards the assignment
// step; anything it drops is counted in the log.
CurationOutcome curate_sample(const QuerySample& sample,
                              std::span<const EndpointConfig> teachers,
                              CompletionClient& client,
                              const PromptTemplateStore& templates,
                              std::string_view template_override = {});

struct DatasetRecord {
    QuerySample sample;
    SFTRecord record;
};

// Keeps records where some ground-truth answer appears (normalized,
// case-insensitive) in a source chunk and some answer appears in the
// target.  Records without answers pass unconditionally.
std::vector<DatasetRecord> clean_dataset(std::span<const DatasetRecord> records);

}  // namespace refinerkit

#endif
