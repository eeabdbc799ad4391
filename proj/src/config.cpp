#include "refinerkit/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "json.hpp"

namespace refinerkit {
namespace {

using nlohmann::json;

EndpointConfig parse_endpoint(const json& node) {
    EndpointConfig endpoint;
    endpoint.name = node.at("name").get<std::string>();
    endpoint.base_url = node.at("base_url").get<std::string>();
    endpoint.model_id = node.value("model_id", endpoint.name);
    endpoint.max_new_tokens = node.value("max_new_tokens", 2048);
    endpoint.sampling = node.value("sampling", false);
    endpoint.repetition_penalty = node.value("repetition_penalty", 1.0);
    endpoint.request_timeout =
        std::chrono::milliseconds(node.value("request_timeout_ms", 30000));
    endpoint.max_in_flight = node.value("max_in_flight", 4);
    endpoint.retries = node.value("retries", 0);
    std::string schema = node.value("schema", "native");
    if (schema == "native")
        endpoint.schema = EndpointConfig::Schema::native;
    else if (schema == "openai")
        endpoint.schema = EndpointConfig::Schema::openai;
    else
        throw ConfigError("endpoint " + endpoint.name + ": unknown schema " + schema);
    if (endpoint.max_new_tokens <= 0)
        throw ConfigError("endpoint " + endpoint.name + ": max_new_tokens must be positive");
    if (endpoint.max_in_flight < 1)
        throw ConfigError("endpoint " + endpoint.name + ": max_in_flight must be >= 1");
    return endpoint;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded()) throw ConfigError("config is not valid JSON: " + path);

    RunConfig config;
    try {
        for (const auto& node : root.value("endpoints", json::array()))
            config.endpoints.push_back(parse_endpoint(node));
        config.teacher_names =
            root.value("teacher_names", std::vector<std::string>{});
        config.prompt_template_dir = root.value("prompt_template_dir", "");
        config.tokenizer = root.value("tokenizer", "whitespace");
        config.worker_limit = root.value("worker_limit", 1);
        config.strict_metrics = root.value("strict_metrics", false);
        // .items() must run on a named object: chaining it onto the value()
        // temporary leaves the iteration reading freed storage
        json task_templates = root.value("task_templates", json::object());
        for (const auto& [task_name, template_id] : task_templates.items())
            config.task_templates[task_from_string(task_name)] =
                template_id.get<std::string>();
        json adapters = root.value("tokenizer_adapters", json::object());
        for (const auto& [name, node] : adapters.items()) {
            TokenizerAdapterConfig adapter;
            std::string type = node.at("type").get<std::string>();
            if (type == "http")
                adapter.type = TokenizerAdapterConfig::Type::http;
            else if (type == "command")
                adapter.type = TokenizerAdapterConfig::Type::command;
            else
                throw ConfigError("tokenizer adapter " + name + ": unknown type " + type);
            adapter.target = node.at("target").get<std::string>();
            config.tokenizer_adapters[name] = std::move(adapter);
        }
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + ": " + e.what());
    }

    if (config.worker_limit < 1)
        throw ConfigError("worker_limit must be >= 1");
    for (const auto& name : config.teacher_names)
        if (!find_endpoint(config, name))
            throw ConfigError("teacher_names references unknown endpoint: " + name);
    return config;
}

void apply_env_overrides(RunConfig& config) {
    for (auto& endpoint : config.endpoints) {
        std::string var = "REFINERKIT_ENDPOINT_";
        for (char c : endpoint.name) {
            if (std::isalnum(static_cast<unsigned char>(c)))
                var += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            else
                var += '_';
        }
        var += "_URL";
        if (const char* value = std::getenv(var.c_str())) endpoint.base_url = value;
    }
}

const EndpointConfig* find_endpoint(const RunConfig& config, std::string_view name) {
    for (const auto& endpoint : config.endpoints)
        if (endpoint.name == name) return &endpoint;
    return nullptr;
}

std::vector<EndpointConfig> teacher_endpoints(const RunConfig& config) {
    std::vector<EndpointConfig> teachers;
    for (const auto& name : config.teacher_names) {
        const EndpointConfig* endpoint = find_endpoint(config, name);
        if (!endpoint) throw ConfigError("unknown teacher endpoint: " + name);
        teachers.push_back(*endpoint);
    }
    return teachers;
}

std::string task_template_id(const RunConfig& config, Task task) {
    auto found = config.task_templates.find(task);
    if (found != config.task_templates.end()) return found->second;
    return default_task_template(task);
}

std::unique_ptr<Tokenizer> make_tokenizer(const RunConfig& config,
                                          const std::string& selection) {
    if (selection.empty() || selection == "whitespace")
        return std::make_unique<WhitespaceTokenizer>();
    constexpr std::string_view prefix = "adapter:";
    if (selection.rfind(prefix, 0) != 0)
        throw ConfigError("tokenizer must be \"whitespace\" or \"adapter:<name>\", got " +
                          selection);
    std::string name = selection.substr(prefix.size());
    auto found = config.tokenizer_adapters.find(name);
    if (found == config.tokenizer_adapters.end())
        throw ConfigError("tokenizer adapter not configured: " + name);
    if (found->second.type == TokenizerAdapterConfig::Type::http)
        return std::make_unique<HttpTokenizer>(found->second.target);
    return std::make_unique<CommandTokenizer>(found->second.target);
}

PromptTemplateStore make_template_store(const RunConfig& config) {
    PromptTemplateStore store;
    if (!config.prompt_template_dir.empty()) store.load_dir(config.prompt_template_dir);
    return store;
}

}  // namespace refinerkit
