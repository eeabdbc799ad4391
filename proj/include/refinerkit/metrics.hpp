#ifndef REFINERKIT_METRICS_HPP
#define REFINERKIT_METRICS_HPP

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace refinerkit {

// Match-based QA scoring: 1 when some ground-truth answer occurs inside
// the prediction.  By default both sides are whitespace-normalized and
// ASCII-lowercased first; strict mode compares raw bytes.  An empty
// answer list scores 0.
int substring_accuracy(std::string_view prediction,
                       std::span<const std::string> answers,
                       bool strict = false);

// Multiple-choice scoring: captures the letter A-E of the first
// "is <sep> (X) <sep>" occurrence in the prediction and requires every
// ground-truth key to equal it case-insensitively.  With no ground-truth
// keys the score is 1 exactly when no such occurrence exists.
int arc_choice_accuracy(std::string_view prediction,
                        std::span<const std::string> answers);

class TokenizerError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class Tokenizer {
  public:
    virtual ~Tokenizer() = default;
    virtual std::size_t count(std::string_view text) const = 0;
};

// Counts maximal runs of non-whitespace bytes.
class WhitespaceTokenizer final : public Tokenizer {
  public:
    std::size_t count(std::string_view text) const override;
};

// POSTs {"text": ...} to a counting endpoint and reads back {"count": N}.
class HttpTokenizer final : public Tokenizer {
  public:
    explicit HttpTokenizer(std::string url);
    std::size_t count(std::string_view text) const override;

  private:
    std::string base_url_;
    std::string path_;
};

// Pipes the text through a shell command and reads one integer back.
class CommandTokenizer final : public Tokenizer {
  public:
    explicit CommandTokenizer(std::string command);
    std::size_t count(std::string_view text) const override;

  private:
    std::string command_;
};

std::size_t count_tokens(std::string_view text, const Tokenizer& tokenizer);
std::size_t count_tokens(std::string_view text);  // whitespace default

// 1 - avg_output/avg_input.  Throws std::domain_error when avg_input <= 0.
double compression_rate(double avg_output_tokens, double avg_input_tokens);

struct Moments {
    double mean = 0.0;
    double std_population = 0.0;
    double std_sample = 0.0;
};

// Two-pass mean and standard deviations; the input must be non-empty and
// std_sample needs at least two values (it is 0 for a single one).
Moments moments(std::span<const double> values);

struct LabeledValue {
    std::string label;
    double value = 0.0;
};

struct AggregateRow {
    std::string task;
    std::vector<LabeledValue> values;
    Moments stats;
};

std::vector<AggregateRow> aggregate(
    const std::vector<std::pair<std::string, std::vector<LabeledValue>>>& rows);

// One downstream prediction joined with its grading data.  Token counts
// are carried alongside so reports can be built without re-tokenizing;
// verbatim item counts are optional pass-through from the refine step.
struct PredictionRecord {
    std::string sample_id;
    std::string task;
    std::string prediction;
    std::vector<std::string> answers;
    std::size_t input_tokens = 0;
    std::size_t output_tokens = 0;
    std::optional<std::size_t> verbatim_items;
    std::optional<std::size_t> total_items;
};

struct MetricReport {
    std::string task;
    std::size_t n_samples = 0;
    double accuracy = 0.0;
    double avg_output_tokens = 0.0;
    double avg_input_tokens = 0.0;
    std::optional<double> compress_rate;
    std::optional<double> verbatim_ratio;
};

struct EvaluateOptions {
    bool strict = false;
};

// Scores one task's records: arc_choice_accuracy for "arc_challenge",
// substring_accuracy for everything else.
MetricReport evaluate_task(const std::string& task,
                           std::span<const PredictionRecord> records,
                           const EvaluateOptions& opts = {});

// Table with one task row per report and a per-label average-token column,
// closed by macro- and micro-averaged compression rate rows.
std::string render_compression_table(
    const std::vector<std::pair<std::string, std::vector<MetricReport>>>& columns);

// Accuracy matrix: tasks as columns, labels as rows, then MEAN and STD
// rows (sample std by default).
std::string render_accuracy_table(const std::vector<AggregateRow>& rows,
                                  bool population_std = false);

}  // namespace refinerkit

#endif
