#include "doctest.h"

#include <algorithm>
#include <random>

#include "json.hpp"
#include "refinerkit/curator.hpp"
#include "refinerkit/metrics.hpp"
#include "support/stub_server.hpp"

using namespace refinerkit;

namespace {

const char* kA1 = "Alpha City is the capital of Examplia.";
const char* kA2 = "It lies on the river Foo.";
const char* kB1 = "Beta Town is a small settlement.";
const char* kB2 = "It is known for cheese.";

const std::vector<DocumentChunk>& chunks_fixture() {
    static const std::vector<DocumentChunk> chunks{
        {"Alpha City",
         "Alpha City is the capital of Examplia. It lies on the river Foo. The city "
         "hosts the Grand Museum."},
        {"Beta Town", "Beta Town is a small settlement. It is known for cheese."},
    };
    return chunks;
}

TeacherOutput teacher(const std::string& name, const std::string& raw) {
    TeacherOutput out;
    out.teacher = name;
    out.raw = raw;
    out.parsed = parse_extract(raw);
    return out;
}

TeacherOutput teacher(const std::string& name, Extract extract) {
    TeacherOutput out;
    out.teacher = name;
    out.parsed = ParseResult{std::move(extract), std::nullopt};
    return out;
}

Extract single_sentence_items(const std::vector<std::string>& sentences) {
    Extract extract;
    SectionGroup group;
    for (const auto& sentence : sentences) group.items.push_back({"Facts", sentence});
    if (!group.items.empty()) extract.groups.push_back(std::move(group));
    return extract;
}

std::vector<std::string> sorted(std::vector<std::string> xs) {
    std::sort(xs.begin(), xs.end());
    return xs;
}

}  // namespace

TEST_SUITE_BEGIN("curator");

TEST_CASE("task names round-trip") {
    for (Task task : {Task::popqa, Task::triviaqa, Task::arc_challenge, Task::hotpotqa,
                      Task::twowiki, Task::pubhealth, Task::other})
        CHECK(task_from_string(to_string(task)) == task);
    CHECK(task_from_string("something else") == Task::other);
}

TEST_CASE("task to teacher prompt mapping") {
    CHECK(default_task_template(Task::arc_challenge) == "teacher_arc");
    CHECK(default_task_template(Task::pubhealth) == "teacher_pubhealth");
    for (Task task : {Task::popqa, Task::triviaqa, Task::hotpotqa, Task::twowiki, Task::other})
        CHECK(default_task_template(task) == "teacher_trivia_hotpot");
}

TEST_CASE("tally_votes counts supporting teachers per sentence") {
    std::vector<TeacherOutput> outputs{
        teacher("t0", std::string("1.1. ## Alpha City\n") + kA1 + " " + kA2),
        teacher("t1", std::string("1.1. ## Alpha City\n") + kA1),
        teacher("t2", std::string("1.1. ## Alpha City\n") + kA1 +
                          "\n\n2.1. ## Beta Town\n" + kB1),
    };
    VoteTally tally = tally_votes(outputs, chunks_fixture());
    REQUIRE(tally.find(kA1) != nullptr);
    CHECK(tally.find(kA1)->supporters == std::vector<std::size_t>{0, 1, 2});
    CHECK(tally.find(kA2)->supporters == std::vector<std::size_t>{0});
    CHECK(tally.find(kB1)->supporters == std::vector<std::size_t>{2});
    CHECK(tally.find("never said") == nullptr);
    // first-appearance order
    REQUIRE(tally.entries.size() == 3);
    CHECK(tally.entries[0].sentence == kA1);
    CHECK(tally.entries[1].sentence == kA2);
    CHECK(tally.entries[2].sentence == kB1);
}

TEST_CASE("tally_votes: a repeating teacher counts once") {
    std::vector<TeacherOutput> outputs{
        teacher("t0", std::string("1.1. ## Alpha City\n") + kA1 +
                          "\n\n1.2. ## Alpha City\n" + kA1),
    };
    VoteTally tally = tally_votes(outputs, chunks_fixture());
    REQUIRE(tally.find(kA1) != nullptr);
    CHECK(tally.find(kA1)->supporters == std::vector<std::size_t>{0});
}

TEST_CASE("tally_votes: non-verbatim and unparseable outputs contribute nothing") {
    std::vector<TeacherOutput> outputs{
        teacher("t0", "1.1. ## Alpha City\nThe mayor is a crocodile."),
        teacher("t1", "I found no quotes, sorry."),
        teacher("t2", std::string("1.1. ## Beta Town\n") + kB2),
    };
    VoteTally tally = tally_votes(outputs, chunks_fixture());
    REQUIRE(tally.entries.size() == 1);
    CHECK(tally.entries[0].sentence == kB2);
    CHECK(tally.entries[0].supporters == std::vector<std::size_t>{2});
}

TEST_CASE("select_majority applies the strict threshold") {
    VoteTally tally;
    tally.entries = {
        {"s1", {0, 1, 2}},
        {"s2", {0, 1}},
        {"s3", {0, 1, 2, 3, 4}},
    };
    CHECK(select_majority(tally, 5) == std::vector<std::string>{"s1", "s3"});
    CHECK(select_majority(tally, 3) == std::vector<std::string>{"s1", "s2", "s3"});
    CHECK(select_majority(tally, 4) == std::vector<std::string>{"s1", "s3"});
    CHECK(select_majority(tally, 6) == std::vector<std::string>{"s3"});
    VoteTally two;
    two.entries = {{"s", {0}}};
    CHECK(select_majority(two, 2).empty());
    CHECK(select_majority(two, 1) == std::vector<std::string>{"s"});
}

TEST_CASE("select_majority ignores teacher order") {
    std::mt19937 rng(61);
    std::vector<std::string> sentences;
    for (int i = 0; i < 5; ++i)
        sentences.push_back("Fact number " + std::to_string(i) + " stands alone.");
    std::string body;
    for (const auto& s : sentences) {
        if (!body.empty()) body += ' ';
        body += s;
    }
    std::vector<DocumentChunk> chunks{{"Facts", body}};

    for (int round = 0; round < 120; ++round) {
        std::size_t n = round % 2 == 0 ? 3 : 5;
        std::vector<TeacherOutput> outputs;
        for (std::size_t t = 0; t < n; ++t) {
            std::vector<std::string> said;
            for (const auto& s : sentences)
                if (rng() % 2) said.push_back(s);
            outputs.push_back(
                teacher("t" + std::to_string(t), single_sentence_items(said)));
        }
        auto base = sorted(select_majority(tally_votes(outputs, chunks), n));
        std::shuffle(outputs.begin(), outputs.end(), rng);
        auto shuffled = sorted(select_majority(tally_votes(outputs, chunks), n));
        CHECK(base == shuffled);
    }
}

TEST_CASE("dropping a no-majority-vote teacher keeps the selection (odd crews)") {
    std::mt19937 rng(62);
    std::vector<std::string> sentences;
    for (int i = 0; i < 6; ++i)
        sentences.push_back("Fact number " + std::to_string(i) + " stands alone.");
    std::string body;
    for (const auto& s : sentences) {
        if (!body.empty()) body += ' ';
        body += s;
    }
    std::vector<DocumentChunk> chunks{{"Facts", body}};

    int exercised = 0;
    for (int round = 0; round < 300 && exercised < 60; ++round) {
        std::size_t n = round % 2 == 0 ? 3 : 5;
        std::vector<TeacherOutput> outputs;
        for (std::size_t t = 0; t < n; ++t) {
            std::vector<std::string> said;
            for (const auto& s : sentences)
                if (rng() % 2) said.push_back(s);
            outputs.push_back(
                teacher("t" + std::to_string(t), single_sentence_items(said)));
        }
        VoteTally tally = tally_votes(outputs, chunks);
        auto kept = select_majority(tally, n);

        // a teacher is removable when it supports none of the kept sentences
        std::optional<std::size_t> removable;
        for (std::size_t t = 0; t < n && !removable; ++t) {
            bool supports = false;
            for (const auto& sentence : kept) {
                const VoteEntry* entry = tally.find(sentence);
                supports = supports || std::count(entry->supporters.begin(),
                                                  entry->supporters.end(), t) > 0;
            }
            if (!supports) removable = t;
        }
        if (!removable) continue;
        ++exercised;
        outputs.erase(outputs.begin() + static_cast<std::ptrdiff_t>(*removable));
        auto rekept = select_majority(tally_votes(outputs, chunks), n - 1);
        CHECK(sorted(rekept) == sorted(kept));
    }
    CHECK(exercised >= 60);
}

TEST_CASE("even crews can flip a half-supported sentence when one leaves") {
    // counts sitting exactly at n/2 cross the strict threshold at n-1;
    // this is why the drop-a-teacher guarantee above is stated for odd sizes
    std::vector<DocumentChunk> chunks{{"Facts", "Fact zero stands alone."}};
    std::vector<TeacherOutput> outputs{
        teacher("t0", single_sentence_items({"Fact zero stands alone."})),
        teacher("t1", single_sentence_items({"Fact zero stands alone."})),
        teacher("t2", single_sentence_items({})),
        teacher("t3", single_sentence_items({})),
    };
    CHECK(select_majority(tally_votes(outputs, chunks), 4).empty());
    outputs.pop_back();
    CHECK(select_majority(tally_votes(outputs, chunks), 3) ==
          std::vector<std::string>{"Fact zero stands alone."});
}

TEST_CASE("assign_sections picks the max-retention teacher") {
    std::vector<std::string> kept{kA1, kB1};
    std::vector<TeacherOutput> outputs{
        // retains only kA1
        teacher("t0", std::string("1.1. ## Alpha City\n") + kA1),
        // retains both, in its own two-group shape
        teacher("t1", std::string("1.1. ## Alpha City\n") + kA1 + " " + kA2 +
                          "\n\n2.1. ## Beta Town\n" + kB1),
        // also retains both; loses the tie to t1
        teacher("t2", std::string("1.1. ## Beta Town\n") + kB1 +
                          "\n\n2.1. ## Alpha City\n" + kA1),
    };
    Extract curated = assign_sections(kept, outputs, chunks_fixture());
    REQUIRE(curated.groups.size() == 2);
    REQUIRE(curated.groups[0].items.size() == 1);
    CHECK(curated.groups[0].items[0].title == "Alpha City");
    CHECK(curated.groups[0].items[0].content == kA1);  // kA2 cut away
    CHECK(curated.groups[1].items[0].title == "Beta Town");
    CHECK(curated.groups[1].items[0].content == kB1);
}

TEST_CASE("assign_sections tie-break goes to the earlier teacher") {
    std::vector<std::string> kept{kA1, kB1};
    std::vector<TeacherOutput> outputs{
        teacher("t0", std::string("1.1. ## Beta Town\n") + kB1 +
                          "\n\n2.1. ## Alpha City\n" + kA1),
        teacher("t1", std::string("1.1. ## Alpha City\n") + kA1 +
                          "\n\n2.1. ## Beta Town\n" + kB1),
    };
    Extract curated = assign_sections(kept, outputs, chunks_fixture());
    REQUIRE(curated.groups.size() == 2);
    CHECK(curated.groups[0].items[0].title == "Beta Town");
}

TEST_CASE("assign_sections edge cases") {
    std::vector<TeacherOutput> outputs{
        teacher("t0", std::string("1.1. ## Alpha City\n") + kA1),
    };
    CHECK(assign_sections({}, outputs, chunks_fixture()).empty());
    CHECK(assign_sections({"never said by anyone"}, outputs, chunks_fixture()).empty());
}

TEST_CASE("assign_sections drops emptied items and renumbers") {
    std::vector<std::string> kept{kB2};
    std::vector<TeacherOutput> outputs{
        teacher("t0", std::string("1.1. ## Alpha City\n") + kA1 +
                          "\n\n2.1. ## Beta Town\n" + kB1 + "\n\n2.2. ## Beta Town\n" + kB2),
    };
    Extract curated = assign_sections(kept, outputs, chunks_fixture());
    REQUIRE(curated.groups.size() == 1);
    REQUIRE(curated.groups[0].items.size() == 1);
    CHECK(curated.groups[0].items[0].content == kB2);
    CHECK(render_extract(curated) == std::string("1.1. ## Beta Town\n") + kB2);
}

TEST_CASE("build_sft_record renders prompt and canonical target") {
    QuerySample sample;
    sample.id = "q7";
    sample.query = "What is the capital of Examplia?";
    sample.chunks = chunks_fixture();

    Extract curated;
    curated.groups.push_back({{{"Alpha City", kA1}}});

    PromptTemplateStore templates;
    SFTRecord record = build_sft_record(sample, curated, templates);
    CHECK(record.sample_id == "q7");
    CHECK(record.prompt.rfind("[INST]<<SYS>>[MONITOR]## Alpha City\n", 0) == 0);
    CHECK(record.prompt.find("<</SYS>>What is the capital of Examplia?[/INST]") !=
          std::string::npos);
    // one document header per chunk inside the system block
    std::size_t headers = 0;
    for (std::size_t pos = 0; (pos = record.prompt.find("## ", pos)) != std::string::npos;
         pos += 3)
        ++headers;
    CHECK(headers == sample.chunks.size());
    CHECK(record.target == std::string("1.1. ## Alpha City\n") + kA1);

    ParseResult back = parse_extract(record.target);
    REQUIRE(back.ok());
    CHECK(*back.value == curated);

    CHECK(build_sft_record(sample, {}, templates).target == "");
}

TEST_CASE("curate_sample end to end over five stub teachers") {
    testgen::StubServer server;
    std::map<std::string, std::string> replies{
        {"m1", std::string("1.1. ## Alpha City\n") + kA1 + " " + kA2 +
                   "\n\n2.1. ## Beta Town\n" + kB1},
        {"m2", std::string("1.1. ## Alpha City\n") + kA1 + "\n\n2.1. ## Beta Town\n" + kB1},
        {"m3", std::string("1.1. ## Alpha City\n") + kA1 + " " + kA2 +
                   "\n\n2.1. ## Beta Town\n" + kB2},
        {"m4", std::string("1.1. ## Alpha City\nThe mayor is a crocodile.\n\n2.1. ## Beta "
                           "Town\n") +
                   kB1},
        {"m5", "I could not find any relevant quotes, sorry about that."},
    };
    std::map<std::string, std::string> seen_prompts;
    std::mutex seen_mutex;
    server.handle_post("/v1/completions",
                       [&](const httplib::Request& req, httplib::Response& res) {
                           auto body = nlohmann::json::parse(req.body);
                           std::string model = body["model"].get<std::string>();
                           {
                               std::lock_guard lock(seen_mutex);
                               seen_prompts[model] = body["prompt"].get<std::string>();
                           }
                           res.set_content(
                               nlohmann::json{{"text", replies.at(model)}}.dump(),
                               "application/json");
                       });
    server.start();

    std::vector<EndpointConfig> teachers;
    for (int i = 1; i <= 5; ++i) {
        EndpointConfig ep;
        ep.name = "teacher" + std::to_string(i);
        ep.base_url = server.base_url();
        ep.model_id = "m" + std::to_string(i);
        teachers.push_back(ep);
    }

    QuerySample sample;
    sample.id = "sample-1";
    sample.query = "What is the capital of Examplia?";
    sample.chunks = chunks_fixture();
    sample.answers = {"Examplia"};
    sample.task = Task::popqa;

    CompletionClient client;
    PromptTemplateStore templates;
    CurationOutcome outcome = curate_sample(sample, teachers, client, templates);

    CHECK(outcome.log.kept == std::vector<std::string>{kA1, kB1});
    CHECK(outcome.log.reference_teacher == "teacher1");
    CHECK(outcome.log.guard_dropped_items == 0);
    REQUIRE(outcome.log.teachers.size() == 5);
    CHECK(outcome.log.teachers[0].status == "ok");
    CHECK(outcome.log.teachers[0].items == 2);
    CHECK(outcome.log.teachers[0].verbatim_items == 2);
    CHECK(outcome.log.teachers[0].retained_kept == 2);
    CHECK(outcome.log.teachers[3].verbatim_items == 1);  // crocodile item dropped
    CHECK(outcome.log.teachers[3].retained_kept == 1);
    CHECK(outcome.log.teachers[4].status == "malformed_output");
    CHECK(outcome.log.teachers[4].retained_kept == 0);

    CHECK(render_extract(outcome.curated) ==
          std::string("1.1. ## Alpha City\n") + kA1 + "\n\n2.1. ## Beta Town\n" + kB1);
    CHECK(outcome.record.target == render_extract(outcome.curated));
    CHECK(outcome.record.sample_id == "sample-1");

    // every teacher saw the same trivia/hotpot prompt
    REQUIRE(seen_prompts.size() == 5);
    for (const auto& [model, prompt] : seen_prompts) {
        CHECK(prompt == seen_prompts.at("m1"));
        CHECK(prompt.find("Question: What is the capital of Examplia?") !=
              std::string::npos);
        CHECK(prompt.find("\n---\n") != std::string::npos);
    }

    // curated items all verbatim, majority-backed
    auto flags = verbatim_flags(outcome.curated, sample.chunks);
    CHECK(std::all_of(flags.begin(), flags.end(), [](bool b) { return b; }));

    // weak length bound: target never out-tokenizes the documents block
    CHECK(count_tokens(outcome.record.target) <=
          count_tokens(render_documents(sample.chunks)));
}

TEST_CASE("curate_sample guards against non-contiguous sentence joins") {
    std::vector<DocumentChunk> chunks{
        {"Obs Deck",
         "The tower is tall. It was built in 1901. Visitors love the view."}};
    std::map<std::string, std::string> replies{
        {"m1", "1.1. ## Obs Deck\nThe tower is tall. It was built in 1901. Visitors "
               "love the view."},
        {"m2", "1.1. ## Obs Deck\nThe tower is tall.\n\n1.2. ## Obs Deck\nVisitors love "
               "the view."},
        {"m3", "1.1. ## Obs Deck\nThe tower is tall.\n\n1.2. ## Obs Deck\nVisitors love "
               "the view."},
    };
    testgen::StubServer server;
    server.handle_post("/v1/completions",
                       [&](const httplib::Request& req, httplib::Response& res) {
                           auto body = nlohmann::json::parse(req.body);
                           res.set_content(
                               nlohmann::json{
                                   {"text", replies.at(body["model"].get<std::string>())}}
                                   .dump(),
                               "application/json");
                       });
    server.start();

    std::vector<EndpointConfig> teachers;
    for (int i = 1; i <= 3; ++i) {
        EndpointConfig ep;
        ep.name = "teacher" + std::to_string(i);
        ep.base_url = server.base_url();
        ep.model_id = "m" + std::to_string(i);
        teachers.push_back(ep);
    }

    QuerySample sample;
    sample.id = "tower";
    sample.query = "How tall is the tower?";
    sample.chunks = chunks;

    CompletionClient client;
    PromptTemplateStore templates;
    CurationOutcome outcome = curate_sample(sample, teachers, client, templates);

    CHECK(outcome.log.kept == std::vector<std::string>{"The tower is tall.",
                                                       "Visitors love the view."});
    // teacher1 wins the retention tie, but its item joins two sentences that
    // are not adjacent in the source; the final verbatim check removes it
    CHECK(outcome.log.reference_teacher == "teacher1");
    CHECK(outcome.log.guard_dropped_items == 1);
    CHECK(outcome.curated.empty());
    CHECK(outcome.record.target == "");
}

TEST_CASE("curate_sample with an unreachable teacher keeps the crew size") {
    testgen::StubServer server;
    server.handle_post("/v1/completions",
                       [&](const httplib::Request& req, httplib::Response& res) {
                           auto body = nlohmann::json::parse(req.body);
                           (void)body;
                           res.set_content(
                               nlohmann::json{
                                   {"text",
                                    std::string("1.1. ## Alpha City\n") + kA1}}
                                   .dump(),
                               "application/json");
                       });
    server.start();

    std::vector<EndpointConfig> teachers;
    for (int i = 1; i <= 3; ++i) {
        EndpointConfig ep;
        ep.name = "teacher" + std::to_string(i);
        ep.base_url = i == 3 ? "http://127.0.0.1:9" : server.base_url();
        ep.model_id = "m";
        teachers.push_back(ep);
    }

    QuerySample sample;
    sample.id = "s";
    sample.query = "q";
    sample.chunks = chunks_fixture();

    CompletionClient client;
    PromptTemplateStore templates;
    CurationOutcome outcome = curate_sample(sample, teachers, client, templates);
    REQUIRE(outcome.log.teachers.size() == 3);
    CHECK(outcome.log.teachers[2].status == "endpoint_connection");
    // two of three supporters still clear the strict majority
    CHECK(outcome.log.kept == std::vector<std::string>{kA1});
    CHECK(render_extract(outcome.curated) == std::string("1.1. ## Alpha City\n") + kA1);
}

TEST_CASE("curate_sample honors a template override") {
    std::string seen_prompt;
    std::mutex seen_mutex;
    testgen::StubServer server;
    server.handle_post("/v1/completions",
                       [&](const httplib::Request& req, httplib::Response& res) {
                           auto body = nlohmann::json::parse(req.body);
                           {
                               std::lock_guard lock(seen_mutex);
                               seen_prompt = body["prompt"].get<std::string>();
                           }
                           res.set_content(nlohmann::json{{"text", ""}}.dump(),
                                           "application/json");
                       });
    server.start();

    EndpointConfig ep;
    ep.name = "t";
    ep.base_url = server.base_url();
    ep.model_id = "m";
    std::vector<EndpointConfig> teachers{ep};

    QuerySample sample;
    sample.id = "s";
    sample.query = "The sky is green.";
    sample.chunks = chunks_fixture();
    sample.task = Task::popqa;

    CompletionClient client;
    PromptTemplateStore templates;
    curate_sample(sample, teachers, client, templates, "teacher_pubhealth");
    CHECK(seen_prompt.find("Statement: The sky is green.") != std::string::npos);

    sample.task = Task::arc_challenge;
    curate_sample(sample, teachers, client, templates);
    CHECK(seen_prompt.find("that either support or contradict to the question") !=
          std::string::npos);
}

TEST_CASE("clean_dataset basics") {
    auto make = [](const std::string& id, std::vector<std::string> answers,
                   const std::string& chunk_content, const std::string& target) {
        DatasetRecord record;
        record.sample.id = id;
        record.sample.answers = std::move(answers);
        record.sample.chunks = {{"Doc", chunk_content}};
        record.record.sample_id = id;
        record.record.target = target;
        return record;
    };

    std::vector<DatasetRecord> records{
        make("keep", {"Examplia"}, "the capital of Examplia", "1.1. ## Doc\nof Examplia"),
        make("no-answers", {}, "anything", "anything"),
        make("missing-in-chunks", {"Examplia"}, "no mention", "1.1. ## Doc\nExamplia"),
        make("missing-in-target", {"Examplia"}, "about Examplia", "1.1. ## Doc\nother"),
        make("case-folded", {"EXAMPLIA"}, "about examplia", "1.1. ## Doc\nexamplia"),
        make("any-of", {"absent", "Examplia"}, "about Examplia", "1.1. ## Doc\nExamplia"),
    };
    auto kept = clean_dataset(records);
    REQUIRE(kept.size() == 4);
    CHECK(kept[0].sample.id == "keep");
    CHECK(kept[1].sample.id == "no-answers");
    CHECK(kept[2].sample.id == "case-folded");
    CHECK(kept[3].sample.id == "any-of");
}

TEST_CASE("clean_dataset: planted violations are exactly the drops") {
    std::vector<DatasetRecord> records;
    std::size_t planted = 0;
    for (int i = 0; i < 100; ++i) {
        DatasetRecord record;
        record.sample.id = "s" + std::to_string(i);
        std::string gold = "gold" + std::to_string(i) + "x";
        bool violation = i % 6 == 0;
        bool hide_in_chunks = violation && i % 12 == 0;
        planted += violation;
        record.sample.answers =
            i % 10 == 3 ? std::vector<std::string>{} : std::vector<std::string>{gold};
        record.sample.chunks = {
            {"Doc", hide_in_chunks ? "no treasure buried here"
                                   : "the value " + gold + " appears here"}};
        record.record.target = (violation && !hide_in_chunks)
                                   ? "1.1. ## Doc\nnothing relevant today"
                                   : "1.1. ## Doc\nthe value " + gold + " appears here";
        records.push_back(std::move(record));
    }
    CHECK(planted == 17);
    auto kept = clean_dataset(records);
    CHECK(kept.size() == 83);
    for (const auto& record : kept) {
        int i = std::stoi(record.sample.id.substr(1));
        CHECK(i % 6 != 0);
    }
}

TEST_SUITE_END();
