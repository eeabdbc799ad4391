#include "refinerkit/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "refinerkit/config.hpp"
#include "refinerkit/pipeline.hpp"
#include "refinerkit/records.hpp"

namespace refinerkit::cli {
namespace {

RunConfig resolve_config(const std::string& config_path) {
    std::string path = config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("REFINERKIT_CONFIG")) path = env;
    }
    RunConfig config;
    if (!path.empty()) config = load_config(path);
    apply_env_overrides(config);
    return config;
}

std::vector<QuerySample> read_samples(const std::string& path, std::size_t limit,
                                      std::ostream& log) {
    std::vector<QuerySample> samples;
    for_each_line(
        path,
        [&](const std::string& line, std::size_t line_number) {
            try {
                samples.push_back(query_sample_from_line(line));
            } catch (const RecordError& e) {
                log << "skipping line " << line_number << ": " << e.what() << "\n";
            }
        },
        limit);
    return samples;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RecordError("cannot write output file: " + path);
    return out;
}

std::string endpoint_error_tag(const EndpointError& error) {
    std::string tag = "endpoint_" + to_string(error.kind);
    if (error.kind == EndpointError::Kind::http_status)
        tag += ":" + std::to_string(error.status);
    return tag;
}

}  // namespace

int cmd_refine(const RefineArgs& args) {
    try {
        RunConfig config = resolve_config(args.config_path);
        const EndpointConfig* endpoint = nullptr;
        if (!args.endpoint.empty()) {
            endpoint = find_endpoint(config, args.endpoint);
            if (!endpoint) throw ConfigError("unknown endpoint: " + args.endpoint);
        } else if (config.endpoints.size() == 1) {
            endpoint = &config.endpoints.front();
        } else {
            throw ConfigError("--endpoint is required when several endpoints are configured");
        }
        auto tokenizer = make_tokenizer(
            config, args.tokenizer.empty() ? config.tokenizer : args.tokenizer);
        PromptTemplateStore templates = make_template_store(config);

        std::vector<QuerySample> samples = read_samples(args.input, args.limit, std::cerr);
        std::ofstream out = open_output(args.output);
        CompletionClient client;
        const std::atomic<bool>* stop = install_interrupt_handler();

        std::size_t endpoint_failures = 0;
        std::size_t completions = 0;
        auto refine_one = [&](std::size_t i) -> RefineRecord {
            const QuerySample& sample = samples[i];
            RefineRecord record;
            record.sample_id = sample.id;
            try {
                std::string prompt = render_prompt(
                    templates.get("refiner_infer"),
                    {{"documents", render_documents(sample.chunks)},
                     {"query", sample.query}});
                record.input_tokens =
                    count_tokens(render_documents(sample.chunks), *tokenizer);
                auto result = client.complete(*endpoint, prompt);
                if (!result.ok()) {
                    record.error = endpoint_error_tag(*result.error);
                    return record;
                }
                record.raw = *result.text;
                record.output_tokens = count_tokens(record.raw, *tokenizer);
                ParseResult parsed = parse_extract(record.raw);
                if (!parsed.ok()) {
                    record.error = parsed.error->kind == ParseErrorKind::malformed_output
                                       ? "malformed_output"
                                       : "dangling_header";
                    return record;
                }
                record.extract = render_extract(*parsed.value);
                record.verbatim_flags = verbatim_flags(*parsed.value, sample.chunks);
            } catch (const std::exception& e) {
                record.error = std::string("internal: ") + e.what();
            }
            return record;
        };
        process_ordered<RefineRecord>(
            samples.size(), config.worker_limit, refine_one,
            [&](std::size_t, RefineRecord&& record) {
                if (record.error && record.error->rfind("endpoint_", 0) == 0)
                    ++endpoint_failures;
                else if (!record.error)
                    ++completions;
                if (record.error)
                    std::cerr << "sample " << record.sample_id << ": " << *record.error
                              << "\n";
                out << to_line(record) << "\n";
                out.flush();
            },
            stop);

        std::cerr << "refined " << completions << "/" << samples.size() << " samples";
        if (endpoint_failures > 0)
            std::cerr << " (" << endpoint_failures << " endpoint failures)";
        std::cerr << "\n";
        if (completions == 0 && endpoint_failures > 0) {
            std::cerr << "endpoint " << endpoint->name << " produced no completions\n";
            return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "refine: " << e.what() << "\n";
        return 1;
    }
}

int cmd_curate(const CurateArgs& args) {
    try {
        RunConfig config = resolve_config(args.config_path);
        std::vector<EndpointConfig> teachers = teacher_endpoints(config);
        if (teachers.empty()) throw ConfigError("config lists no teacher_names");
        PromptTemplateStore templates = make_template_store(config);

        std::vector<QuerySample> samples = read_samples(args.input, args.limit, std::cerr);
        std::ofstream out = open_output(args.output);
        std::ofstream log = open_output(args.output + ".log");
        CompletionClient client;
        const std::atomic<bool>* stop = install_interrupt_handler();

        struct SampleResult {
            CurationOutcome outcome;
            bool kept_after_cleaning = false;
            bool internal_error = false;
            std::string error;
        };

        std::size_t written = 0;
        std::size_t attempted = 0;
        std::size_t kept_sentences_total = 0;
        std::vector<std::size_t> teacher_parses(teachers.size(), 0);

        auto curate_one = [&](std::size_t i) -> SampleResult {
            SampleResult result;
            const QuerySample& sample = samples[i];
            std::string template_override = args.template_override.empty()
                                                ? task_template_id(config, sample.task)
                                                : args.template_override;
            try {
                result.outcome = curate_sample(sample, teachers, client, templates,
                                               template_override);
                DatasetRecord record{sample, result.outcome.record};
                result.kept_after_cleaning =
                    !clean_dataset(std::span(&record, 1)).empty();
            } catch (const std::exception& e) {
                result.internal_error = true;
                result.error = e.what();
            }
            return result;
        };
        process_ordered<SampleResult>(
            samples.size(), config.worker_limit, curate_one,
            [&](std::size_t i, SampleResult&& result) {
                ++attempted;
                if (result.internal_error) {
                    log << nlohmann::json{{"error", result.error},
                                          {"sample_id", samples[i].id}}
                               .dump()
                        << "\n";
                    std::cerr << "sample " << samples[i].id << ": " << result.error
                              << "\n";
                    return;
                }
                const CurationOutcome& outcome = result.outcome;
                for (std::size_t t = 0; t < outcome.log.teachers.size(); ++t)
                    if (outcome.log.teachers[t].status == "ok") ++teacher_parses[t];
                kept_sentences_total += outcome.log.kept.size();
                log << to_line(outcome.log) << "\n";
                log.flush();
                if (result.kept_after_cleaning) {
                    out << to_line(outcome.record) << "\n";
                    out.flush();
                    ++written;
                } else {
                    std::cerr << "sample " << outcome.log.sample_id
                              << ": dropped by cleaning\n";
                }
            },
            stop);

        std::cerr << "curated " << written << "/" << attempted << " samples\n";
        for (std::size_t t = 0; t < teachers.size(); ++t)
            std::cerr << "teacher " << teachers[t].name << ": " << teacher_parses[t]
                      << "/" << attempted << " parsed\n";
        if (attempted > 0)
            std::cerr << "mean kept sentences: "
                      << static_cast<double>(kept_sentences_total) /
                             static_cast<double>(attempted)
                      << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "curate: " << e.what() << "\n";
        return 1;
    }
}

int cmd_evaluate(const EvaluateArgs& args) {
    try {
        RunConfig config = resolve_config(args.config_path);
        EvaluateOptions opts;
        opts.strict = args.strict_metrics || config.strict_metrics;

        std::vector<PredictionRecord> records;
        for_each_line(
            args.input,
            [&](const std::string& line, std::size_t line_number) {
                try {
                    records.push_back(prediction_record_from_line(line));
                } catch (const RecordError& e) {
                    std::cerr << "skipping line " << line_number << ": " << e.what()
                              << "\n";
                }
            },
            args.limit);
        if (records.empty()) {
            std::cerr << "evaluate: no prediction records in " << args.input << "\n";
            return 1;
        }
        if (!args.task.empty())
            for (auto& record : records) record.task = args.task;

        std::vector<std::string> task_order;
        for (const auto& record : records)
            if (std::find(task_order.begin(), task_order.end(), record.task) ==
                task_order.end())
                task_order.push_back(record.task);

        std::vector<MetricReport> reports;
        for (const auto& task : task_order) {
            std::vector<PredictionRecord> bucket;
            for (const auto& record : records)
                if (record.task == task) bucket.push_back(record);
            reports.push_back(evaluate_task(task, bucket, opts));
        }

        std::vector<std::pair<std::string, std::vector<MetricReport>>> columns{
            {"predictions", reports}};
        std::cout << render_compression_table(columns);
        for (const auto& report : reports) {
            std::cout << report.task << ": accuracy "
                      << report.accuracy * 100.0 << "% over " << report.n_samples
                      << " samples";
            if (report.verbatim_ratio)
                std::cout << ", verbatim ratio " << *report.verbatim_ratio;
            std::cout << "\n";
        }
        if (!args.output.empty()) {
            std::ofstream out = open_output(args.output);
            for (const auto& report : reports) out << to_line(report) << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "evaluate: " << e.what() << "\n";
        return 1;
    }
}

int cmd_restructure(const RestructureArgs& args) {
    try {
        bool strip = args.template_id == "strip";
        std::optional<StructureTemplate> tmpl;
        if (!strip) {
            tmpl = parse_template_id(args.template_id);
            if (!tmpl)
                throw RecordError("unknown template id: " + args.template_id +
                                  " (expected <content>-<section>-<title> or \"strip\")");
        }
        std::ofstream out = open_output(args.output);
        std::size_t failures = 0;
        for_each_line(
            args.input,
            [&](const std::string& line, std::size_t line_number) {
                RefineRecord record;
                try {
                    record = refine_record_from_line(line);
                } catch (const RecordError& e) {
                    std::cerr << "skipping line " << line_number << ": " << e.what()
                              << "\n";
                    ++failures;
                    return;
                }
                if (!record.extract) {
                    std::cerr << "skipping " << record.sample_id
                              << ": no extract stored\n";
                    ++failures;
                    return;
                }
                ParseResult parsed = parse_extract(*record.extract);
                if (!parsed.ok()) {
                    std::cerr << "skipping " << record.sample_id
                              << ": stored extract does not parse\n";
                    ++failures;
                    return;
                }
                RestructureRecord restructured;
                restructured.sample_id = record.sample_id;
                restructured.template_id = args.template_id;
                restructured.text = strip ? strip_structure(*parsed.value)
                                          : render_extract(*parsed.value, *tmpl);
                out << to_line(restructured) << "\n";
            },
            args.limit);
        if (failures > 0) std::cerr << failures << " records skipped\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "restructure: " << e.what() << "\n";
        return 1;
    }
}

int cmd_stats(const StatsArgs& args) {
    try {
        std::vector<std::pair<std::string, std::vector<MetricReport>>> columns;
        for (const auto& path : args.inputs) {
            std::string label = std::filesystem::path(path).stem().string();
            std::vector<MetricReport> reports;
            for_each_line(path, [&](const std::string& line, std::size_t line_number) {
                try {
                    reports.push_back(metric_report_from_line(line));
                } catch (const RecordError& e) {
                    std::cerr << path << " line " << line_number << ": " << e.what()
                              << "\n";
                }
            });
            columns.emplace_back(std::move(label), std::move(reports));
        }
        if (columns.empty()) {
            std::cerr << "stats: no report files given\n";
            return 1;
        }

        std::vector<std::string> task_order;
        for (const auto& [label, reports] : columns) {
            (void)label;
            for (const auto& report : reports)
                if (std::find(task_order.begin(), task_order.end(), report.task) ==
                    task_order.end())
                    task_order.push_back(report.task);
        }

        std::vector<std::pair<std::string, std::vector<LabeledValue>>> accuracy_rows;
        for (const auto& task : task_order) {
            std::vector<LabeledValue> values;
            for (const auto& [label, reports] : columns)
                for (const auto& report : reports)
                    if (report.task == task)
                        values.push_back({label, report.accuracy * 100.0});
            accuracy_rows.emplace_back(task, std::move(values));
        }

        std::ostringstream text;
        text << "Accuracy (%)\n"
             << render_accuracy_table(aggregate(accuracy_rows), args.population_std)
             << "\n";
        text << "Output size\n" << render_compression_table(columns);

        std::string verbatim_lines;
        for (const auto& [label, reports] : columns)
            for (const auto& report : reports)
                if (report.verbatim_ratio) {
                    std::ostringstream row;
                    row << label << " " << report.task << " verbatim ratio "
                        << *report.verbatim_ratio << "\n";
                    verbatim_lines += row.str();
                }
        if (!verbatim_lines.empty()) text << "\nVerbatim\n" << verbatim_lines;

        std::cout << text.str();
        if (!args.output.empty()) {
            std::ofstream out = open_output(args.output);
            out << text.str();
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "stats: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace refinerkit::cli
