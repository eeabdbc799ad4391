#ifndef REFINERKIT_CONFIG_HPP
#define REFINERKIT_CONFIG_HPP

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "refinerkit/curator.hpp"
#include "refinerkit/metrics.hpp"
#include "refinerkit/model_client.hpp"

namespace refinerkit {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TokenizerAdapterConfig {
    enum class Type { http, command };
    Type type = Type::command;
    // URL for http adapters, shell command for command adapters.
    std::string target;
};

struct RunConfig {
    std::vector<EndpointConfig> endpoints;
    std::vector<std::string> teacher_names;  // curation order
    std::string prompt_template_dir;         // empty: built-in bodies
    std::string tokenizer = "whitespace";    // "whitespace" or "adapter:<name>"
    int worker_limit = 1;
    bool strict_metrics = false;
    std::map<Task, std::string> task_templates;  // overrides per task
    std::map<std::string, TokenizerAdapterConfig> tokenizer_adapters;
};

// Reads the JSON config; complains about unknown endpoint references,
// bad values, or unreadable files.
RunConfig load_config(const std::string& path);

// REFINERKIT_ENDPOINT_<NAME>_URL replaces the base_url of the endpoint
// with that name (name uppercased, non-alphanumerics as '_').
void apply_env_overrides(RunConfig& config);

const EndpointConfig* find_endpoint(const RunConfig& config, std::string_view name);

// Teacher endpoints in teacher_names order.  Throws ConfigError on an
// unresolved name.
std::vector<EndpointConfig> teacher_endpoints(const RunConfig& config);

// The teacher template id for a task: configured override or the
// task's default.
std::string task_template_id(const RunConfig& config, Task task);

// Builds the tokenizer selected by "whitespace" or "adapter:<name>".
std::unique_ptr<Tokenizer> make_tokenizer(const RunConfig& config,
                                          const std::string& selection);

// Template store honoring prompt_template_dir when set.
PromptTemplateStore make_template_store(const RunConfig& config);

}  // namespace refinerkit

#endif
