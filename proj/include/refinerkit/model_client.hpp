#ifndef REFINERKIT_MODEL_CLIENT_HPP
#define REFINERKIT_MODEL_CLIENT_HPP

#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "refinerkit/verbatim.hpp"

namespace refinerkit {

struct EndpointConfig {
    std::string name;
    std::string base_url;
    std::string model_id;
    int max_new_tokens = 2048;
    bool sampling = false;  // greedy decoding when false
    double repetition_penalty = 1.0;
    std::chrono::milliseconds request_timeout{30000};
    int max_in_flight = 4;
    int retries = 0;
    enum class Schema { native, openai };
    Schema schema = Schema::native;
};

struct PromptTemplate {
    std::string id;
    std::string body;
    std::vector<std::string> placeholders;
};

class TemplateError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// The five shipped prompts, addressable by id:
//   teacher_trivia_hotpot, teacher_arc, teacher_pubhealth   {query} {context}
//   refiner_infer                                           {documents} {query}
//   downstream_answer                                       {refiner} {query}
// load_dir replaces bodies with the byte-exact files of the same name.
class PromptTemplateStore {
  public:
    PromptTemplateStore();
    void load_dir(const std::string& dir);  // throws TemplateError
    const PromptTemplate& get(std::string_view id) const;  // throws TemplateError
    std::vector<std::string> ids() const;

  private:
    std::vector<PromptTemplate> templates_;
};

// Pure placeholder substitution.  Throws TemplateError naming every
// placeholder that has no binding; unused bindings are ignored.
std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& bindings);

// {context} body for the teacher prompts: "## title\ncontent" blocks with
// a line holding "---" between consecutive documents.
std::string render_context(std::span<const DocumentChunk> chunks);

// {documents} body for the refiner prompt: the same blocks joined by
// plain newlines.
std::string render_documents(std::span<const DocumentChunk> chunks);

struct EndpointError {
    enum class Kind { timeout, http_status, malformed_response, connection };
    Kind kind;
    int status = 0;
    std::string message;
};

std::string to_string(EndpointError::Kind kind);

// Completion transport.  One instance is meant to be shared: it enforces
// each endpoint's max_in_flight across all calling threads.
class CompletionClient {
  public:
    struct Result {
        std::optional<std::string> text;
        std::optional<EndpointError> error;
        bool ok() const { return text.has_value(); }
    };

    Result complete(const EndpointConfig& endpoint, const std::string& prompt);

  private:
    struct Gate {
        std::mutex mutex;
        std::condition_variable ready;
        int in_flight = 0;
    };
    Gate& gate_for(const std::string& name);
    Result attempt(const EndpointConfig& endpoint, const std::string& prompt);

    std::mutex gates_mutex_;
    std::map<std::string, std::unique_ptr<Gate>> gates_;
};

}  // namespace refinerkit

#endif
