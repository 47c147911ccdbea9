#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "endovqa/dataprep.hpp"

namespace endovqa::metrics {

struct SampleScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double exact_match = 0.0;
};

/**
 * Set metrics of one prediction. Both sets empty scores 1 everywhere (a
 * correctly predicted "no answer"); one-sided emptiness scores 0.
 *
 * @throws std::invalid_argument on a length mismatch.
 */
SampleScore sample_score(const dataprep::LabelVector& truth, const dataprep::LabelVector& pred);

struct MetricRow {
    double accuracy = 0.0;   ///< exact-match rate
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t count = 0;
};

struct MetricsReport {
    MetricRow overall;
    std::map<int, MetricRow> per_question;
};

struct ScoredSample {
    int question_id = 0;
    SampleScore score;
};

/// Unweighted means over all samples and over each question's samples.
MetricsReport aggregate(std::span<const ScoredSample> samples);

/// Aligned text table: one row per question, then an "All" row.
std::string format_table(const MetricsReport& report,
                         std::span<const std::string> question_names = {});

/// {"overall": {...}, "per_question": [{"question_id", "question", ...}]}
std::string to_json(const MetricsReport& report, std::span<const std::string> question_names = {});

}  // namespace endovqa::metrics
