#include "endovqa/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace endovqa::metrics {

SampleScore sample_score(const dataprep::LabelVector& truth, const dataprep::LabelVector& pred) {
    if (truth.size() != pred.size()) {
        throw std::invalid_argument("sample_score: truth has " + std::to_string(truth.size()) +
                                    " labels, prediction has " + std::to_string(pred.size()));
    }
    std::size_t tp = 0, n_truth = 0, n_pred = 0;
    bool equal = true;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool t = truth[i] != 0;
        const bool p = pred[i] != 0;
        tp += (t && p) ? 1 : 0;
        n_truth += t ? 1 : 0;
        n_pred += p ? 1 : 0;
        equal = equal && (t == p);
    }

    SampleScore s;
    s.exact_match = equal ? 1.0 : 0.0;
    if (n_truth == 0 && n_pred == 0) {
        s.precision = s.recall = s.f1 = 1.0;
        return s;
    }
    s.precision = n_pred == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_pred);
    s.recall = n_truth == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(n_truth);
    s.f1 = (s.precision + s.recall) == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

namespace {

struct Accumulator {
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
    std::size_t count = 0;

    void add(const SampleScore& s) {
        accuracy += s.exact_match;
        precision += s.precision;
        recall += s.recall;
        f1 += s.f1;
        ++count;
    }

    MetricRow mean() const {
        MetricRow row;
        row.count = count;
        if (count == 0) return row;
        const double n = static_cast<double>(count);
        row.accuracy = accuracy / n;
        row.precision = precision / n;
        row.recall = recall / n;
        row.f1 = f1 / n;
        return row;
    }
};

std::string question_label(int id, std::span<const std::string> names) {
    if (id >= 0 && static_cast<std::size_t>(id) < names.size()) return names[static_cast<std::size_t>(id)];
    return "Q" + std::to_string(id);
}

}  // namespace

MetricsReport aggregate(std::span<const ScoredSample> samples) {
    Accumulator all;
    std::map<int, Accumulator> by_question;
    for (const auto& s : samples) {
        all.add(s.score);
        by_question[s.question_id].add(s.score);
    }
    MetricsReport report;
    report.overall = all.mean();
    for (const auto& [q, acc] : by_question) report.per_question[q] = acc.mean();
    return report;
}

std::string format_table(const MetricsReport& report, std::span<const std::string> question_names) {
    std::vector<std::string> labels;
    std::size_t width = std::string("Question").size();
    for (const auto& [q, row] : report.per_question) {
        labels.push_back(question_label(q, question_names));
        width = std::max(width, labels.back().size());
    }

    std::ostringstream out;
    auto emit = [&](const std::string& label, const MetricRow& row) {
        out << std::left << std::setw(static_cast<int>(width)) << label << std::right << std::fixed
            << std::setprecision(4) << "  " << std::setw(9) << row.accuracy << "  " << std::setw(9)
            << row.precision << "  " << std::setw(9) << row.recall << "  " << std::setw(9) << row.f1 << "  "
            << std::setw(7) << row.count << '\n';
    };
    out << std::left << std::setw(static_cast<int>(width)) << "Question" << std::right << "  " << std::setw(9)
        << "Accuracy" << "  " << std::setw(9) << "Precision" << "  " << std::setw(9) << "Recall" << "  "
        << std::setw(9) << "F1-Score" << "  " << std::setw(7) << "Samples" << '\n';
    std::size_t i = 0;
    for (const auto& [q, row] : report.per_question) emit(labels[i++], row);
    emit("All", report.overall);
    return out.str();
}

std::string to_json(const MetricsReport& report, std::span<const std::string> question_names) {
    auto row_json = [](const MetricRow& row) {
        return nlohmann::json{{"accuracy", row.accuracy},
                              {"precision", row.precision},
                              {"recall", row.recall},
                              {"f1", row.f1},
                              {"count", row.count}};
    };
    nlohmann::json doc;
    doc["overall"] = row_json(report.overall);
    doc["per_question"] = nlohmann::json::array();
    for (const auto& [q, row] : report.per_question) {
        auto j = row_json(row);
        j["question_id"] = q;
        j["question"] = question_label(q, question_names);
        doc["per_question"].push_back(std::move(j));
    }
    return doc.dump(2);
}

}  // namespace endovqa::metrics
