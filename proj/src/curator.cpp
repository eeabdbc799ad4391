#include "refinerkit/curator.hpp"

#include <algorithm>
#include <thread>

namespace refinerkit {
namespace {

// Distinct normalized sentences of a filtered extract, first appearance
// first.
std::vector<std::string> sentence_set(const Extract& extract) {
    std::vector<std::string> out;
    for (const auto& group : extract.groups) {
        for (const auto& item : group.items) {
            for (auto& sentence : segment_sentences(item.content)) {
                if (std::find(out.begin(), out.end(), sentence) == out.end())
                    out.push_back(std::move(sentence));
            }
        }
    }
    return out;
}

bool contains(const std::vector<std::string>& haystack, std::string_view needle) {
    return std::find(haystack.begin(), haystack.end(), needle) != haystack.end();
}

// Verbatim-filtered extract per output; empty extract for outputs that
// never parsed.
std::vector<Extract> filtered_extracts(std::span<const TeacherOutput> outputs,
                                       std::span<const DocumentChunk> chunks) {
    std::vector<Extract> out(outputs.size());
    for (std::size_t i = 0; i < outputs.size(); ++i)
        if (outputs[i].parsed.ok())
            out[i] = filter_verbatim(*outputs[i].parsed.value, chunks);
    return out;
}

std::size_t retention(const std::vector<std::string>& kept,
                      const std::vector<std::string>& sentences) {
    std::size_t n = 0;
    for (const auto& sentence : kept)
        if (contains(sentences, sentence)) ++n;
    return n;
}

}  // namespace

std::string to_string(Task task) {
    switch (task) {
        case Task::popqa: return "popqa";
        case Task::triviaqa: return "triviaqa";
        case Task::arc_challenge: return "arc_challenge";
        case Task::hotpotqa: return "hotpotqa";
        case Task::twowiki: return "twowiki";
        case Task::pubhealth: return "pubhealth";
        case Task::other: return "other";
    }
    return "other";
}

Task task_from_string(std::string_view name) {
    if (name == "popqa") return Task::popqa;
    if (name == "triviaqa") return Task::triviaqa;
    if (name == "arc_challenge") return Task::arc_challenge;
    if (name == "hotpotqa") return Task::hotpotqa;
    if (name == "twowiki") return Task::twowiki;
    if (name == "pubhealth") return Task::pubhealth;
    return Task::other;
}

std::string default_task_template(Task task) {
    switch (task) {
        case Task::arc_challenge: return "teacher_arc";
        case Task::pubhealth: return "teacher_pubhealth";
        default: return "teacher_trivia_hotpot";
    }
}

std::vector<TeacherOutput> collect_teacher_outputs(const QuerySample& sample,
                                                   std::span<const EndpointConfig> teachers,
                                                   CompletionClient& client,
                                                   const PromptTemplateStore& templates,
                                                   std::string_view template_override) {
    const PromptTemplate& tmpl = templates.get(
        template_override.empty() ? default_task_template(sample.task)
                                  : std::string(template_override));
    std::string prompt = render_prompt(
        tmpl, {{"query", sample.query}, {"context", render_context(sample.chunks)}});

    std::vector<TeacherOutput> outputs(teachers.size());
    std::vector<std::thread> workers;
    workers.reserve(teachers.size());
    for (std::size_t i = 0; i < teachers.size(); ++i) {
        workers.emplace_back([&, i] {
            TeacherOutput& out = outputs[i];
            out.teacher = teachers[i].name;
            auto result = client.complete(teachers[i], prompt);
            if (!result.ok()) {
                out.endpoint_error = result.error;
                return;
            }
            out.raw = *result.text;
            out.parsed = parse_extract(out.raw);
        });
    }
    for (auto& worker : workers) worker.join();
    return outputs;
}

const VoteEntry* VoteTally::find(std::string_view sentence) const {
    for (const auto& entry : entries)
        if (entry.sentence == sentence) return &entry;
    return nullptr;
}

VoteTally tally_votes(std::span<const TeacherOutput> outputs,
                      std::span<const DocumentChunk> chunks) {
    VoteTally tally;
    std::vector<Extract> filtered = filtered_extracts(outputs, chunks);
    for (std::size_t ti = 0; ti < outputs.size(); ++ti) {
        for (const auto& sentence : sentence_set(filtered[ti])) {
            VoteEntry* entry = nullptr;
            for (auto& candidate : tally.entries)
                if (candidate.sentence == sentence) entry = &candidate;
            if (!entry) {
                tally.entries.push_back({sentence, {}});
                entry = &tally.entries.back();
            }
            entry->supporters.push_back(ti);
        }
    }
    return tally;
}

std::vector<std::string> select_majority(const VoteTally& tally,
                                         std::size_t teacher_count) {
    std::vector<std::string> kept;
    for (const auto& entry : tally.entries)
        if (2 * entry.supporters.size() > teacher_count) kept.push_back(entry.sentence);
    return kept;
}

Extract assign_sections(const std::vector<std::string>& kept,
                        std::span<const TeacherOutput> outputs,
                        std::span<const DocumentChunk> chunks) {
    if (kept.empty()) return {};
    std::vector<Extract> filtered = filtered_extracts(outputs, chunks);
    std::size_t best = 0;
    std::size_t best_retained = 0;
    for (std::size_t ti = 0; ti < filtered.size(); ++ti) {
        std::size_t retained = retention(kept, sentence_set(filtered[ti]));
        if (retained > best_retained) {
            best_retained = retained;
            best = ti;
        }
    }
    if (best_retained == 0) return {};

    Extract curated;
    for (const auto& group : filtered[best].groups) {
        SectionGroup surviving;
        for (const auto& item : group.items) {
            std::string content;
            for (const auto& sentence : segment_sentences(item.content)) {
                if (!contains(kept, sentence)) continue;
                if (!content.empty()) content += ' ';
                content += sentence;
            }
            if (!content.empty()) surviving.items.push_back({item.title, std::move(content)});
        }
        if (!surviving.items.empty()) curated.groups.push_back(std::move(surviving));
    }
    return curated;
}

SFTRecord build_sft_record(const QuerySample& sample, const Extract& curated,
                           const PromptTemplateStore& templates) {
    SFTRecord record;
    record.sample_id = sample.id;
    record.prompt = render_prompt(templates.get("refiner_infer"),
                                  {{"documents", render_documents(sample.chunks)},
                                   {"query", sample.query}});
    record.target = render_extract(curated);
    return record;
}

CurationOutcome curate_sample(const QuerySample& sample,
                              std::span<const EndpointConfig> teachers,
                              CompletionClient& client,
                              const PromptTemplateStore& templates,
                              std::string_view template_override) {
    CurationOutcome outcome;
    outcome.log.sample_id = sample.id;

    auto outputs =
        collect_teacher_outputs(sample, teachers, client, templates, template_override);
    VoteTally tally = tally_votes(outputs, sample.chunks);
    outcome.log.kept = select_majority(tally, outputs.size());

    Extract assigned = assign_sections(outcome.log.kept, outputs, sample.chunks);
    // The kept sentences inside one item are not always contiguous in the
    // source, so re-check the joined contents and drop any that fail.
    outcome.curated = filter_verbatim(assigned, sample.chunks);
    outcome.log.guard_dropped_items =
        assigned.item_count() - outcome.curated.item_count();

    std::vector<Extract> filtered = filtered_extracts(outputs, sample.chunks);
    std::size_t best = 0;
    std::size_t best_retained = 0;
    for (std::size_t ti = 0; ti < outputs.size(); ++ti) {
        const TeacherOutput& output = outputs[ti];
        CurationLog::TeacherTrace trace;
        trace.teacher = output.teacher;
        if (output.endpoint_error) {
            trace.status = "endpoint_" + to_string(output.endpoint_error->kind);
        } else if (!output.parsed.ok()) {
            trace.status = output.parsed.error->kind == ParseErrorKind::malformed_output
                               ? "malformed_output"
                               : "dangling_header";
        } else {
            trace.status = "ok";
            trace.items = output.parsed.value->item_count();
        }
        trace.verbatim_items = filtered[ti].item_count();
        trace.retained_kept = retention(outcome.log.kept, sentence_set(filtered[ti]));
        if (trace.retained_kept > best_retained) {
            best_retained = trace.retained_kept;
            best = ti;
        }
        outcome.log.teachers.push_back(std::move(trace));
    }
    if (best_retained > 0 && !outputs.empty())
        outcome.log.reference_teacher = outputs[best].teacher;

    outcome.record = build_sft_record(sample, outcome.curated, templates);
    return outcome;
}

std::vector<DatasetRecord> clean_dataset(std::span<const DatasetRecord> records) {
    std::vector<DatasetRecord> kept;
    for (const auto& record : records) {
        const auto& answers = record.sample.answers;
        if (answers.empty()) {
            kept.push_back(record);
            continue;
        }
        bool in_chunks = false;
        for (const auto& chunk : record.sample.chunks) {
            std::string haystack = normalize_casefold(chunk.content);
            for (const auto& answer : answers)
                in_chunks = in_chunks ||
                            haystack.find(normalize_casefold(answer)) != std::string::npos;
        }
        bool in_target = false;
        std::string target = normalize_casefold(record.record.target);
        for (const auto& answer : answers)
            in_target = in_target ||
                        target.find(normalize_casefold(answer)) != std::string::npos;
        if (in_chunks && in_target) kept.push_back(record);
    }
    return kept;
}

}  // namespace refinerkit
