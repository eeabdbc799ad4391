#ifndef REFINERKIT_CLI_HPP
#define REFINERKIT_CLI_HPP

#include <string>
#include <vector>

namespace refinerkit::cli {

// Shared by all commands; config_path falls back to $REFINERKIT_CONFIG,
// then to built-in defaults (no endpoints, whitespace tokenizer).
struct RefineArgs {
    std::string config_path;
    std::string input;
    std::string output;
    std::string endpoint;   // defaults to the only configured endpoint
    std::string tokenizer;  // overrides the config selection
    std::size_t limit = 0;
};

struct CurateArgs {
    std::string config_path;
    std::string input;
    std::string output;          // SFT records; log goes to output + ".log"
    std::string template_override;  // teacher template for every sample
    std::size_t limit = 0;
};

struct EvaluateArgs {
    std::string config_path;
    std::string input;
    std::string output;  // optional report file
    std::string task;    // treat every record as this task
    std::string tokenizer;
    bool strict_metrics = false;
    std::size_t limit = 0;
};

struct RestructureArgs {
    std::string input;
    std::string output;
    std::string template_id;  // one of the 18 ids or "strip"
    std::size_t limit = 0;
};

struct StatsArgs {
    std::vector<std::string> inputs;  // report files; label = file stem
    std::string output;               // optional copy of the tables
    bool population_std = false;
};

int cmd_refine(const RefineArgs& args);
int cmd_curate(const CurateArgs& args);
int cmd_evaluate(const EvaluateArgs& args);
int cmd_restructure(const RestructureArgs& args);
int cmd_stats(const StatsArgs& args);

}  // namespace refinerkit::cli

#endif
