#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace endovqa::dataprep {

inline constexpr int kQuestionCount = 18;

/// The 18 questions asked of every image, indexed by question id.
const std::array<std::string, kQuestionCount>& standard_questions();

struct ImageEntry {
    std::string image_id;
    std::string path;
    std::string abnormality;
    bool has_black_box = false;

    bool operator==(const ImageEntry&) const = default;
};

using AnswerSet = std::set<std::string>;

struct QARecord {
    std::string image_id;
    int question_id = 0;
    std::string question;
    AnswerSet answers;

    bool operator==(const QARecord&) const = default;
};

/// Sorted, duplicate-free answer list; the position of an answer is its label index.
class AnswerVocabulary {
public:
    AnswerVocabulary() = default;
    /// Trims, de-duplicates and sorts.
    explicit AnswerVocabulary(std::vector<std::string> answers);

    std::size_t size() const { return answers_.size(); }
    bool empty() const { return answers_.empty(); }
    const std::vector<std::string>& answers() const { return answers_; }
    const std::string& operator[](std::size_t i) const { return answers_[i]; }
    std::optional<std::size_t> find(std::string_view answer) const;

    /// FNV-1a over the newline-joined answers; stored in checkpoints.
    std::uint64_t hash() const;

    bool operator==(const AnswerVocabulary&) const = default;

private:
    std::vector<std::string> answers_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

using LabelVector = std::vector<std::uint8_t>;

struct SplitResult {
    std::vector<ImageEntry> train;
    std::vector<ImageEntry> val;
    std::vector<ImageEntry> test;
    std::vector<std::string> warnings;
};

/// Split fractions, defaulting to 8:1:1.
struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

/// Per-class counts for `n` members by largest-remainder rounding; ties go to
/// the earlier split (train, then val, then test).
std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios);

/**
 * Stratified split by abnormality. Each class is shuffled under `seed`
 * (classes visited in name order) and cut according to split_counts().
 * Classes with fewer than 3 members go wholly to train with a warning.
 * Each output keeps the manifest order of its entries.
 *
 * @throws std::invalid_argument on bad ratios, empty labels or duplicate ids.
 */
SplitResult stratified_split(std::span<const ImageEntry> entries, std::uint64_t seed,
                             const SplitRatios& ratios = {});

/// (image_id, question_id) -> answers, as read from a QA manifest.
using AnswerIndex = std::map<std::pair<std::string, int>, AnswerSet>;

AnswerIndex index_answers(std::span<const QARecord> records);

/// One record per (image, question). Answers come from `known` when given;
/// a missing pair is a DataError.
std::vector<QARecord> expand_qa(std::span<const ImageEntry> entries,
                                std::span<const std::string> questions,
                                const AnswerIndex* known = nullptr);

AnswerVocabulary build_vocabulary(std::span<const QARecord> records);

/// @throws std::invalid_argument naming the first answer missing from `vocab`.
LabelVector binarize(const AnswerSet& answers, const AnswerVocabulary& vocab);

/// @throws std::invalid_argument on a length mismatch.
AnswerSet debinarize(const LabelVector& bits, const AnswerVocabulary& vocab);

// JSONL manifests, one object per line. Readers throw DataError with the
// 1-based line number of the first malformed line.
std::vector<ImageEntry> read_image_manifest(const std::filesystem::path& path);
void write_image_manifest(std::span<const ImageEntry> entries, const std::filesystem::path& path);
std::vector<QARecord> read_qa_manifest(const std::filesystem::path& path);
void write_qa_manifest(std::span<const QARecord> records, const std::filesystem::path& path);

/// Plain text, one answer per line; the line number is the label index.
AnswerVocabulary read_vocabulary(const std::filesystem::path& path);
void write_vocabulary(const AnswerVocabulary& vocab, const std::filesystem::path& path);

std::string trim(std::string_view s);

}  // namespace endovqa::dataprep
