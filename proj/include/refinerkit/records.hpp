#ifndef REFINERKIT_RECORDS_HPP
#define REFINERKIT_RECORDS_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "refinerkit/curator.hpp"
#include "refinerkit/metrics.hpp"

namespace refinerkit {

class RecordError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// What cmd_refine writes per sample.  Exactly one of extract/error is
// meaningful: parse or endpoint failures carry the reason and no extract.
struct RefineRecord {
    std::string sample_id;
    std::string raw;
    std::optional<std::string> extract;  // canonical rendering
    std::vector<bool> verbatim_flags;
    std::size_t input_tokens = 0;
    std::size_t output_tokens = 0;
    std::optional<std::string> error;  // parse/endpoint tag
};

// cmd_restructure output line.
struct RestructureRecord {
    std::string sample_id;
    std::string template_id;
    std::string text;
};

// JSON line <-> struct.  All to_line outputs are single-line JSON with
// keys in fixed (alphabetical) order, so equal records serialize equally.
QuerySample query_sample_from_line(const std::string& line);
std::string to_line(const QuerySample& sample);

RefineRecord refine_record_from_line(const std::string& line);
std::string to_line(const RefineRecord& record);

SFTRecord sft_record_from_line(const std::string& line);
std::string to_line(const SFTRecord& record);

std::string to_line(const CurationLog& log);

PredictionRecord prediction_record_from_line(const std::string& line);
std::string to_line(const PredictionRecord& record);

MetricReport metric_report_from_line(const std::string& line);
std::string to_line(const MetricReport& report);

std::string to_line(const RestructureRecord& record);

// Streams a line-delimited file, skipping blank lines; stops after limit
// records when limit > 0.  Throws RecordError when the file cannot be
// opened; callbacks get the 1-based line number for error reporting.
void for_each_line(const std::string& path,
                   const std::function<void(const std::string&, std::size_t)>& fn,
                   std::size_t limit = 0);

}  // namespace refinerkit

#endif
