#include "refinerkit/model_client.hpp"

#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

namespace refinerkit {
namespace {

constexpr const char* kTeacherTriviaHotpot =
    R"RK(You are an expert research assistant. Your job is to find the quotes from the markdown documents that are relevant to a question.
Please mark quotes with sections and titles of documents to group quotes by different information only from relevant documents.
Rule of labelling sections: if the fact of the first dummy quote "aaa" from a document with title "## AAA" is consistent with that of the second dummy quote "bbb" from a document with title "## BBB", and they contradict to that of the third dummy quote "ccc" from a document with title "## CCC", then label them as:
```
1.1. ## AAA
aaa

1.2. ## BBB
bbb

2.1. ## CCC
ccc

```
Quotes should be verbatim and context completed.
Please respond without any explanation.

Question: {query}
Document (multiple documents are separated by "---"):
{context})RK";

constexpr const char* kTeacherArc =
    R"RK(You are an expert research assistant. Your job is to find the quotes from the markdown documents that are relevant to a question.
Please mark quotes with sections and titles of documents to group quotes by different information only from relevant documents that either support or contradict to the question.
Rule of labelling sections: if the fact of the first dummy quote "aaa" from a document with title "## AAA" is consistent with that of the second dummy quote "bbb" from a document with title "## BBB", and they contradict to that of the third dummy quote "ccc" from a document with title "## CCC", then label them as:
```
1.1. ## AAA
aaa

1.2. ## BBB
bbb

2.1. ## CCC
ccc

```
Quotes should be verbatim and context completed.
Please respond without any explanation.

Question: {query}
Document (multiple documents are separated by "---"):
{context})RK";

constexpr const char* kTeacherPubhealth =
    R"RK(You are an expert research assistant. Your job is to find the quotes from the markdown documents that either support or contradict to a statement.
Please mark quotes with sections and titles of documents to group quotes by different information only from relevant documents that are helpful with answering to the statement.
Rule of labelling sections: if the fact of the first dummy quote "aaa" from a document with title "## AAA" is consistent with that of the second dummy quote "bbb" from a document with title "## BBB", and they contradict to that of the third dummy quote "ccc" from a document with title "## CCC", then label them as:
```
1.1. ## AAA
aaa

1.2. ## BBB
bbb

2.1. ## CCC
ccc

```
Quotes should be verbatim and context completed.
Please respond without any explanation.

Statement: {query}
Document (multiple documents are separated by "---"):
{context})RK";

constexpr const char* kRefinerInfer =
    R"RK([INST]<<SYS>>[MONITOR]{documents}<</SYS>>{query}[/INST])RK";

constexpr const char* kDownstreamAnswer =
    R"RK(You are an AI assistant backboned by selective content from different documents, answer user's question helpfully and precisely, with the guidance of the following steps:
* If there are no content provided: determine whether it is still possible to answer precisely to the question.
* If is possible, offer a helpful answer. Otherwise, offer the reason of impossibility.

* If there exists contents: determine whether the necessary information to answer the question is either directly mentioned or can be inferred from the documents.
* When there exists different information that can answer to the question, determine whether it is the question too opaque that causes the problem.
* If not, answer with a summarized information. Otherwise, also provide advice or ask question to disambiguate.
* When summarizing, ensure to include contents that are relevant to the question.
Here is the content:
{refiner}

{query})RK";

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TemplateError("cannot read template file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

PromptTemplateStore::PromptTemplateStore() {
    templates_ = {
        {"teacher_trivia_hotpot", kTeacherTriviaHotpot, {"query", "context"}},
        {"teacher_arc", kTeacherArc, {"query", "context"}},
        {"teacher_pubhealth", kTeacherPubhealth, {"query", "context"}},
        {"refiner_infer", kRefinerInfer, {"documents", "query"}},
        {"downstream_answer", kDownstreamAnswer, {"refiner", "query"}},
    };
}

void PromptTemplateStore::load_dir(const std::string& dir) {
    for (auto& tmpl : templates_)
        tmpl.body = read_file_bytes(dir + "/" + tmpl.id + ".txt");
}

const PromptTemplate& PromptTemplateStore::get(std::string_view id) const {
    for (const auto& tmpl : templates_)
        if (tmpl.id == id) return tmpl;
    throw TemplateError("unknown template id: " + std::string(id));
}

std::vector<std::string> PromptTemplateStore::ids() const {
    std::vector<std::string> out;
    for (const auto& tmpl : templates_) out.push_back(tmpl.id);
    return out;
}

std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& bindings) {
    std::string out;
    std::vector<std::string> missing;
    const std::string& body = tmpl.body;
    std::size_t pos = 0;
    while (pos < body.size()) {
        std::size_t open = body.find('{', pos);
        if (open == std::string::npos) {
            out.append(body, pos, std::string::npos);
            break;
        }
        std::size_t close = body.find('}', open + 1);
        if (close == std::string::npos) {
            out.append(body, pos, std::string::npos);
            break;
        }
        out.append(body, pos, open - pos);
        std::string name = body.substr(open + 1, close - open - 1);
        auto found = bindings.find(name);
        if (found == bindings.end()) {
            bool known = false;
            for (const auto& m : missing) known = known || m == name;
            if (!known) missing.push_back(name);
        } else {
            out += found->second;
        }
        pos = close + 1;
    }
    if (!missing.empty()) {
        std::string what = "template " + tmpl.id + " is missing bindings:";
        for (const auto& name : missing) what += " {" + name + "}";
        throw TemplateError(what);
    }
    return out;
}

std::string render_context(std::span<const DocumentChunk> chunks) {
    std::string out;
    for (const auto& chunk : chunks) {
        if (!out.empty()) out += "\n---\n";
        out += "## " + chunk.title + "\n" + chunk.content;
    }
    return out;
}

std::string render_documents(std::span<const DocumentChunk> chunks) {
    std::string out;
    for (const auto& chunk : chunks) {
        if (!out.empty()) out += "\n";
        out += "## " + chunk.title + "\n" + chunk.content;
    }
    return out;
}

std::string to_string(EndpointError::Kind kind) {
    switch (kind) {
        case EndpointError::Kind::timeout: return "timeout";
        case EndpointError::Kind::http_status: return "http_status";
        case EndpointError::Kind::malformed_response: return "malformed_response";
        case EndpointError::Kind::connection: return "connection";
    }
    return "unknown";
}

CompletionClient::Gate& CompletionClient::gate_for(const std::string& name) {
    std::lock_guard lock(gates_mutex_);
    auto& slot = gates_[name];
    if (!slot) slot = std::make_unique<Gate>();
    return *slot;
}

CompletionClient::Result CompletionClient::complete(const EndpointConfig& endpoint,
                                                    const std::string& prompt) {
    Gate& gate = gate_for(endpoint.name);
    int limit = std::max(1, endpoint.max_in_flight);
    {
        std::unique_lock lock(gate.mutex);
        gate.ready.wait(lock, [&] { return gate.in_flight < limit; });
        ++gate.in_flight;
    }
    Result result;
    int attempts = std::max(0, endpoint.retries) + 1;
    for (int i = 0; i < attempts; ++i) {
        result = attempt(endpoint, prompt);
        if (result.ok()) break;
    }
    {
        std::lock_guard lock(gate.mutex);
        --gate.in_flight;
    }
    gate.ready.notify_one();
    return result;
}

CompletionClient::Result CompletionClient::attempt(const EndpointConfig& endpoint,
                                                   const std::string& prompt) {
    httplib::Client client(endpoint.base_url);
    auto timeout = endpoint.request_timeout;
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                  (timeout % std::chrono::seconds(1)).count() * 1000);
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                            (timeout % std::chrono::seconds(1)).count() * 1000);
    client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                             (timeout % std::chrono::seconds(1)).count() * 1000);

    nlohmann::json body{
        {"model", endpoint.model_id},
        {"prompt", prompt},
        {"max_tokens", endpoint.max_new_tokens},
    };
    if (endpoint.schema == EndpointConfig::Schema::native) {
        body["greedy"] = !endpoint.sampling;
        body["repetition_penalty"] = endpoint.repetition_penalty;
    } else {
        body["temperature"] = endpoint.sampling ? 1.0 : 0.0;
    }

    auto res = client.Post("/v1/completions", body.dump(), "application/json");
    if (!res) {
        EndpointError::Kind kind;
        switch (res.error()) {
            case httplib::Error::ConnectionTimeout:
            case httplib::Error::Read:
            case httplib::Error::Write:
                kind = EndpointError::Kind::timeout;
                break;
            default:
                kind = EndpointError::Kind::connection;
                break;
        }
        return {std::nullopt,
                EndpointError{kind, 0, httplib::to_string(res.error())}};
    }
    if (res->status != 200)
        return {std::nullopt,
                EndpointError{EndpointError::Kind::http_status, res->status,
                              "endpoint returned status " + std::to_string(res->status)}};

    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded())
        return {std::nullopt,
                EndpointError{EndpointError::Kind::malformed_response, 0,
                              "response body is not JSON"}};
    if (endpoint.schema == EndpointConfig::Schema::native) {
        if (!parsed.contains("text") || !parsed["text"].is_string())
            return {std::nullopt,
                    EndpointError{EndpointError::Kind::malformed_response, 0,
                                  "response carries no text field"}};
        return {parsed["text"].get<std::string>(), std::nullopt};
    }
    if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty() || !parsed["choices"][0].contains("text") ||
        !parsed["choices"][0]["text"].is_string())
        return {std::nullopt,
                EndpointError{EndpointError::Kind::malformed_response, 0,
                              "response carries no choices[0].text"}};
    return {parsed["choices"][0]["text"].get<std::string>(), std::nullopt};
}

}  // namespace refinerkit
