#include "refinerkit/metrics.hpp"

#include <unistd.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

#include "refinerkit/verbatim.hpp"

namespace refinerkit {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

char ascii_lower(char c) {
    return c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_word_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           (c >= '0' && c <= '9') || c == '_';
}

// First occurrence of "is", one or more non-word characters, a letter A-E,
// one or more non-word characters.  Returns the letter or 0.
char first_choice_match(std::string_view s) {
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (s[i] != 'i' || s[i + 1] != 's') continue;
        std::size_t k = i + 2;
        while (k < s.size() && !is_word_char(s[k])) ++k;
        if (k == i + 2) continue;  // needs a separator after "is"
        if (k >= s.size() || s[k] < 'A' || s[k] > 'E') continue;
        if (k + 1 >= s.size() || is_word_char(s[k + 1])) continue;
        return s[k];
    }
    return 0;
}

bool equals_ignore_case(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
    return true;
}

}  // namespace

int substring_accuracy(std::string_view prediction,
                       std::span<const std::string> answers,
                       bool strict) {
    if (answers.empty()) return 0;
    if (strict) {
        for (const auto& answer : answers)
            if (prediction.find(answer) != std::string_view::npos) return 1;
        return 0;
    }
    std::string haystack = normalize_casefold(prediction);
    for (const auto& answer : answers)
        if (haystack.find(normalize_casefold(answer)) != std::string::npos) return 1;
    return 0;
}

int arc_choice_accuracy(std::string_view prediction,
                        std::span<const std::string> answers) {
    char match = first_choice_match(prediction);
    if (answers.empty()) return match == 0 ? 1 : 0;
    if (match == 0) return 0;
    std::string_view captured(&match, 1);
    for (const auto& answer : answers)
        if (!equals_ignore_case(answer, captured)) return 0;
    return 1;
}

std::size_t WhitespaceTokenizer::count(std::string_view text) const {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++n;
        }
    }
    return n;
}

HttpTokenizer::HttpTokenizer(std::string url) {
    std::size_t scheme = url.find("://");
    std::size_t slash = scheme == std::string::npos ? url.find('/')
                                                    : url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        base_url_ = std::move(url);
        path_ = "/";
    } else {
        base_url_ = url.substr(0, slash);
        path_ = url.substr(slash);
    }
}

std::size_t HttpTokenizer::count(std::string_view text) const {
    httplib::Client client(base_url_);
    nlohmann::json body{{"text", std::string(text)}};
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) throw TokenizerError("token endpoint unreachable: " + base_url_);
    if (res->status != 200)
        throw TokenizerError("token endpoint returned status " +
                             std::to_string(res->status));
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("count") ||
        !parsed["count"].is_number_unsigned())
        throw TokenizerError("token endpoint sent no usable count");
    return parsed["count"].get<std::size_t>();
}

CommandTokenizer::CommandTokenizer(std::string command)
    : command_(std::move(command)) {}

std::size_t CommandTokenizer::count(std::string_view text) const {
    char in_path[] = "/tmp/refinerkit_tok_in_XXXXXX";
    char out_path[] = "/tmp/refinerkit_tok_out_XXXXXX";
    int in_fd = mkstemp(in_path);
    int out_fd = mkstemp(out_path);
    if (in_fd < 0 || out_fd < 0) throw TokenizerError("cannot create temp files");
    close(out_fd);
    {
        std::ofstream in(in_path, std::ios::binary);
        in.write(text.data(), static_cast<std::streamsize>(text.size()));
    }
    close(in_fd);
    std::string cmd = command_;
    cmd += " < ";
    cmd += in_path;
    cmd += " > ";
    cmd += out_path;
    int rc = std::system(cmd.c_str());
    std::ifstream out(out_path);
    long long value = -1;
    out >> value;
    std::remove(in_path);
    std::remove(out_path);
    if (rc != 0) throw TokenizerError("token command failed: " + command_);
    if (value < 0) throw TokenizerError("token command printed no count");
    return static_cast<std::size_t>(value);
}

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer) {
    return tokenizer.count(text);
}

std::size_t count_tokens(std::string_view text) {
    return WhitespaceTokenizer{}.count(text);
}

double compression_rate(double avg_output_tokens, double avg_input_tokens) {
    if (avg_input_tokens <= 0.0)
        throw std::domain_error("compression_rate needs positive average input tokens");
    return 1.0 - avg_output_tokens / avg_input_tokens;
}

Moments moments(std::span<const double> values) {
    Moments m;
    if (values.empty()) return m;
    double sum = 0.0;
    for (double v : values) sum += v;
    m.mean = sum / static_cast<double>(values.size());
    double squares = 0.0;
    for (double v : values) squares += (v - m.mean) * (v - m.mean);
    m.std_population = std::sqrt(squares / static_cast<double>(values.size()));
    m.std_sample = values.size() > 1
                       ? std::sqrt(squares / static_cast<double>(values.size() - 1))
                       : 0.0;
    return m;
}

std::vector<AggregateRow> aggregate(
    const std::vector<std::pair<std::string, std::vector<LabeledValue>>>& rows) {
    std::vector<AggregateRow> out;
    out.reserve(rows.size());
    for (const auto& [task, values] : rows) {
        std::vector<double> plain;
        plain.reserve(values.size());
        for (const auto& lv : values) plain.push_back(lv.value);
        out.push_back({task, values, moments(plain)});
    }
    return out;
}

MetricReport evaluate_task(const std::string& task,
                           std::span<const PredictionRecord> records,
                           const EvaluateOptions& opts) {
    MetricReport report;
    report.task = task;
    report.n_samples = records.size();
    if (records.empty()) return report;
    std::size_t correct = 0;
    double in_tokens = 0.0;
    double out_tokens = 0.0;
    std::size_t verbatim_items = 0;
    std::size_t total_items = 0;
    bool any_verbatim = false;
    for (const auto& record : records) {
        if (task == "arc_challenge")
            correct += arc_choice_accuracy(record.prediction, record.answers);
        else
            correct += substring_accuracy(record.prediction, record.answers, opts.strict);
        in_tokens += static_cast<double>(record.input_tokens);
        out_tokens += static_cast<double>(record.output_tokens);
        if (record.verbatim_items && record.total_items) {
            any_verbatim = true;
            verbatim_items += *record.verbatim_items;
            total_items += *record.total_items;
        }
    }
    double n = static_cast<double>(records.size());
    report.accuracy = static_cast<double>(correct) / n;
    report.avg_input_tokens = in_tokens / n;
    report.avg_output_tokens = out_tokens / n;
    if (report.avg_input_tokens > 0.0)
        report.compress_rate =
            compression_rate(report.avg_output_tokens, report.avg_input_tokens);
    if (any_verbatim)
        report.verbatim_ratio = total_items == 0
                                    ? 1.0
                                    : static_cast<double>(verbatim_items) /
                                          static_cast<double>(total_items);
    return report;
}

namespace {

std::string task_display_name(const std::string& task) {
    if (task == "popqa") return "POPQA";
    if (task == "triviaqa") return "TQA";
    if (task == "arc_challenge") return "ARC-C";
    if (task == "hotpotqa") return "HOTPOT";
    if (task == "twowiki") return "2WIKI";
    if (task == "pubhealth") return "PUBHEALTH";
    std::string up = task;
    for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return up;
}

std::string fixed(double value, int places) {
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(places) << value;
    return ss.str();
}

std::string render_grid(const std::vector<std::vector<std::string>>& cells) {
    std::vector<std::size_t> widths;
    for (const auto& row : cells) {
        if (widths.size() < row.size()) widths.resize(row.size());
        for (std::size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], row[i].size());
    }
    std::ostringstream ss;
    for (const auto& row : cells) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == 0)
                ss << std::left << std::setw(static_cast<int>(widths[i])) << row[i];
            else
                ss << "  " << std::right << std::setw(static_cast<int>(widths[i]))
                   << row[i];
        }
        ss << '\n';
    }
    return ss.str();
}

}  // namespace

std::string render_compression_table(
    const std::vector<std::pair<std::string, std::vector<MetricReport>>>& columns) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"Task"};
    for (const auto& [label, reports] : columns) {
        (void)reports;
        header.push_back(label + " (avg #token)");
    }
    cells.push_back(std::move(header));

    std::vector<std::string> tasks;
    if (!columns.empty())
        for (const auto& report : columns.front().second) tasks.push_back(report.task);

    auto find_report = [](const std::vector<MetricReport>& reports,
                          const std::string& task) -> const MetricReport* {
        for (const auto& report : reports)
            if (report.task == task) return &report;
        return nullptr;
    };

    for (const auto& task : tasks) {
        std::vector<std::string> row{task_display_name(task)};
        for (const auto& [label, reports] : columns) {
            (void)label;
            const MetricReport* report = find_report(reports, task);
            row.push_back(report ? fixed(report->avg_output_tokens, 1) : "-");
        }
        cells.push_back(std::move(row));
    }

    std::vector<std::string> macro_row{"Compress Rate (macro)"};
    std::vector<std::string> micro_row{"Compress Rate (micro)"};
    for (const auto& [label, reports] : columns) {
        (void)label;
        double rate_sum = 0.0;
        std::size_t rate_n = 0;
        double in_sum = 0.0;
        double out_sum = 0.0;
        for (const auto& report : reports) {
            if (report.compress_rate) {
                rate_sum += *report.compress_rate;
                ++rate_n;
            }
            double n = static_cast<double>(report.n_samples);
            in_sum += report.avg_input_tokens * n;
            out_sum += report.avg_output_tokens * n;
        }
        macro_row.push_back(rate_n == 0 ? "-" : fixed(100.0 * rate_sum / rate_n, 1) + "%");
        micro_row.push_back(in_sum <= 0.0
                                ? "-"
                                : fixed(100.0 * compression_rate(out_sum, in_sum), 1) + "%");
    }
    cells.push_back(std::move(macro_row));
    cells.push_back(std::move(micro_row));
    return render_grid(cells);
}

std::string render_accuracy_table(const std::vector<AggregateRow>& rows,
                                  bool population_std) {
    std::vector<std::vector<std::string>> cells;
    std::vector<std::string> header{"Model"};
    for (const auto& row : rows) header.push_back(task_display_name(row.task));
    cells.push_back(std::move(header));

    std::vector<std::string> labels;
    if (!rows.empty())
        for (const auto& lv : rows.front().values) labels.push_back(lv.label);

    auto find_value = [](const AggregateRow& row,
                         const std::string& label) -> const LabeledValue* {
        for (const auto& lv : row.values)
            if (lv.label == label) return &lv;
        return nullptr;
    };

    for (const auto& label : labels) {
        std::vector<std::string> line{label};
        for (const auto& row : rows) {
            const LabeledValue* lv = find_value(row, label);
            line.push_back(lv ? fixed(lv->value, 1) : "-");
        }
        cells.push_back(std::move(line));
    }

    std::vector<std::string> mean_row{"MEAN"};
    std::vector<std::string> std_row{"STD"};
    for (const auto& row : rows) {
        mean_row.push_back(fixed(row.stats.mean, 2));
        std_row.push_back(
            fixed(population_std ? row.stats.std_population : row.stats.std_sample, 2));
    }
    cells.push_back(std::move(mean_row));
    cells.push_back(std::move(std_row));
    return render_grid(cells);
}

}  // namespace refinerkit
