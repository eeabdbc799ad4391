#include "CLI11.hpp"

#include "refinerkit/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"post-retrieval extraction toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "config file (or $REFINERKIT_CONFIG)")
        ->envname("REFINERKIT_CONFIG");

    refinerkit::cli::RefineArgs refine;
    auto* refine_cmd =
        app.add_subcommand("refine", "run samples through a refiner endpoint");
    refine_cmd->add_option("--input", refine.input, "samples (JSONL)")->required();
    refine_cmd->add_option("--output", refine.output, "refine records (JSONL)")
        ->required();
    refine_cmd->add_option("--endpoint", refine.endpoint, "endpoint name");
    refine_cmd->add_option("--tokenizer", refine.tokenizer,
                           "whitespace or adapter:<name>");
    refine_cmd->add_option("--limit", refine.limit, "process only the first N records");

    refinerkit::cli::CurateArgs curate;
    auto* curate_cmd =
        app.add_subcommand("curate", "build SFT records from teacher endpoints");
    curate_cmd->add_option("--input", curate.input, "samples (JSONL)")->required();
    curate_cmd->add_option("--output", curate.output, "SFT records (JSONL)")
        ->required();
    curate_cmd->add_option("--template", curate.template_override,
                           "teacher template id override");
    curate_cmd->add_option("--limit", curate.limit, "process only the first N records");

    refinerkit::cli::EvaluateArgs evaluate;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score prediction records");
    evaluate_cmd->add_option("--input", evaluate.input, "predictions (JSONL)")
        ->required();
    evaluate_cmd->add_option("--output", evaluate.output, "metric reports (JSONL)");
    evaluate_cmd->add_option("--task", evaluate.task, "treat every record as this task");
    evaluate_cmd->add_option("--tokenizer", evaluate.tokenizer,
                             "whitespace or adapter:<name>");
    evaluate_cmd->add_flag("--strict-metrics", evaluate.strict_metrics,
                           "bit-exact case-sensitive substring matching");
    evaluate_cmd->add_option("--limit", evaluate.limit,
                             "process only the first N records");

    refinerkit::cli::RestructureArgs restructure;
    auto* restructure_cmd =
        app.add_subcommand("restructure", "re-render stored extracts");
    restructure_cmd->add_option("--input", restructure.input, "refine records (JSONL)")
        ->required();
    restructure_cmd
        ->add_option("--output", restructure.output, "restructured records (JSONL)")
        ->required();
    restructure_cmd
        ->add_option("--template", restructure.template_id,
                     "<content>-<section>-<title> or \"strip\"")
        ->required();
    restructure_cmd->add_option("--limit", restructure.limit,
                                "process only the first N records");

    refinerkit::cli::StatsArgs stats;
    auto* stats_cmd = app.add_subcommand("stats", "aggregate metric reports");
    stats_cmd->add_option("--input", stats.inputs, "report files (JSONL)")
        ->required()
        ->expected(-1);
    stats_cmd->add_option("--output", stats.output, "also write tables here");
    stats_cmd->add_flag("--population-std", stats.population_std,
                        "population instead of sample standard deviation");

    CLI11_PARSE(app, argc, argv);

    refine.config_path = config_path;
    curate.config_path = config_path;
    evaluate.config_path = config_path;

    if (refine_cmd->parsed()) return refinerkit::cli::cmd_refine(refine);
    if (curate_cmd->parsed()) return refinerkit::cli::cmd_curate(curate);
    if (evaluate_cmd->parsed()) return refinerkit::cli::cmd_evaluate(evaluate);
    if (restructure_cmd->parsed()) return refinerkit::cli::cmd_restructure(restructure);
    if (stats_cmd->parsed()) return refinerkit::cli::cmd_stats(stats);
    return 1;
}
