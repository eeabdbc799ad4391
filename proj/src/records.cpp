#include "refinerkit/records.hpp"

#include <fstream>

#include "json.hpp"

namespace refinerkit {
namespace {

using nlohmann::json;

json parse_line(const std::string& line) {
    json node = json::parse(line, nullptr, false);
    if (node.is_discarded() || !node.is_object())
        throw RecordError("line is not a JSON object: " + line.substr(0, 80));
    return node;
}

}  // namespace

QuerySample query_sample_from_line(const std::string& line) {
    json node = parse_line(line);
    QuerySample sample;
    try {
        sample.id = node.at("id").get<std::string>();
        sample.query = node.at("query").get<std::string>();
        for (const auto& chunk : node.value("chunks", json::array()))
            sample.chunks.push_back({chunk.value("title", ""),
                                     chunk.at("content").get<std::string>()});
        sample.answers = node.value("answers", std::vector<std::string>{});
        sample.task = task_from_string(node.value("task", "other"));
    } catch (const json::exception& e) {
        throw RecordError(std::string("bad sample record: ") + e.what());
    }
    return sample;
}

std::string to_line(const QuerySample& sample) {
    json chunks = json::array();
    for (const auto& chunk : sample.chunks)
        chunks.push_back({{"content", chunk.content}, {"title", chunk.title}});
    json node{{"answers", sample.answers},
              {"chunks", std::move(chunks)},
              {"id", sample.id},
              {"query", sample.query},
              {"task", to_string(sample.task)}};
    return node.dump();
}

RefineRecord refine_record_from_line(const std::string& line) {
    json node = parse_line(line);
    RefineRecord record;
    try {
        record.sample_id = node.at("sample_id").get<std::string>();
        record.raw = node.value("raw", "");
        if (node.contains("extract") && node["extract"].is_string())
            record.extract = node["extract"].get<std::string>();
        record.verbatim_flags = node.value("verbatim_flags", std::vector<bool>{});
        record.input_tokens = node.value("input_tokens", std::size_t{0});
        record.output_tokens = node.value("output_tokens", std::size_t{0});
        if (node.contains("error") && node["error"].is_string())
            record.error = node["error"].get<std::string>();
    } catch (const json::exception& e) {
        throw RecordError(std::string("bad refine record: ") + e.what());
    }
    return record;
}

std::string to_line(const RefineRecord& record) {
    json node{{"input_tokens", record.input_tokens},
              {"output_tokens", record.output_tokens},
              {"raw", record.raw},
              {"sample_id", record.sample_id},
              {"verbatim_flags", record.verbatim_flags}};
    if (record.extract) node["extract"] = *record.extract;
    if (record.error) node["error"] = *record.error;
    return node.dump();
}

SFTRecord sft_record_from_line(const std::string& line) {
    json node = parse_line(line);
    SFTRecord record;
    try {
        record.sample_id = node.at("sample_id").get<std::string>();
        record.prompt = node.at("prompt").get<std::string>();
        record.target = node.at("target").get<std::string>();
    } catch (const json::exception& e) {
        throw RecordError(std::string("bad SFT record: ") + e.what());
    }
    return record;
}

std::string to_line(const SFTRecord& record) {
    json node{{"prompt", record.prompt},
              {"sample_id", record.sample_id},
              {"target", record.target}};
    return node.dump();
}

std::string to_line(const CurationLog& log) {
    json teachers = json::array();
    for (const auto& trace : log.teachers)
        teachers.push_back({{"items", trace.items},
                            {"retained_kept", trace.retained_kept},
                            {"status", trace.status},
                            {"teacher", trace.teacher},
                            {"verbatim_items", trace.verbatim_items}});
    json node{{"guard_dropped_items", log.guard_dropped_items},
              {"kept", log.kept},
              {"reference_teacher", log.reference_teacher},
              {"sample_id", log.sample_id},
              {"teachers", std::move(teachers)}};
    return node.dump();
}

PredictionRecord prediction_record_from_line(const std::string& line) {
    json node = parse_line(line);
    PredictionRecord record;
    try {
        record.sample_id = node.at("sample_id").get<std::string>();
        record.task = node.value("task", "other");
        record.prediction = node.at("prediction").get<std::string>();
        record.answers = node.value("answers", std::vector<std::string>{});
        record.input_tokens = node.value("input_tokens", std::size_t{0});
        record.output_tokens = node.value("output_tokens", std::size_t{0});
        if (node.contains("verbatim_items"))
            record.verbatim_items = node["verbatim_items"].get<std::size_t>();
        if (node.contains("total_items"))
            record.total_items = node["total_items"].get<std::size_t>();
    } catch (const json::exception& e) {
        throw RecordError(std::string("bad prediction record: ") + e.what());
    }
    return record;
}

std::string to_line(const PredictionRecord& record) {
    json node{{"answers", record.answers},
              {"input_tokens", record.input_tokens},
              {"output_tokens", record.output_tokens},
              {"prediction", record.prediction},
              {"sample_id", record.sample_id},
              {"task", record.task}};
    if (record.verbatim_items) node["verbatim_items"] = *record.verbatim_items;
    if (record.total_items) node["total_items"] = *record.total_items;
    return node.dump();
}

MetricReport metric_report_from_line(const std::string& line) {
    json node = parse_line(line);
    MetricReport report;
    try {
        report.task = node.at("task").get<std::string>();
        report.n_samples = node.at("n_samples").get<std::size_t>();
        report.accuracy = node.at("accuracy").get<double>();
        report.avg_output_tokens = node.value("avg_output_tokens", 0.0);
        report.avg_input_tokens = node.value("avg_input_tokens", 0.0);
        if (node.contains("compress_rate") && node["compress_rate"].is_number())
            report.compress_rate = node["compress_rate"].get<double>();
        if (node.contains("verbatim_ratio") && node["verbatim_ratio"].is_number())
            report.verbatim_ratio = node["verbatim_ratio"].get<double>();
    } catch (const json::exception& e) {
        throw RecordError(std::string("bad metric report: ") + e.what());
    }
    return report;
}

std::string to_line(const MetricReport& report) {
    json node{{"accuracy", report.accuracy},
              {"avg_input_tokens", report.avg_input_tokens},
              {"avg_output_tokens", report.avg_output_tokens},
              {"n_samples", report.n_samples},
              {"task", report.task}};
    node["compress_rate"] = report.compress_rate ? json(*report.compress_rate) : json();
    node["verbatim_ratio"] = report.verbatim_ratio ? json(*report.verbatim_ratio) : json();
    return node.dump();
}

std::string to_line(const RestructureRecord& record) {
    json node{{"sample_id", record.sample_id},
              {"template", record.template_id},
              {"text", record.text}};
    return node.dump();
}

void for_each_line(const std::string& path,
                   const std::function<void(const std::string&, std::size_t)>& fn,
                   std::size_t limit) {
    std::ifstream in(path);
    if (!in) throw RecordError("cannot read input file: " + path);
    std::string line;
    std::size_t line_number = 0;
    std::size_t taken = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        fn(line, line_number);
        if (limit > 0 && ++taken >= limit) break;
    }
}

}  // namespace refinerkit
