#include "endovqa/dataprep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "endovqa/error.hpp"

namespace endovqa::dataprep {

using nlohmann::json;

const std::array<std::string, kQuestionCount>& standard_questions() {
    static const std::array<std::string, kQuestionCount> questions = {
        "What type of procedure is the image taken from?",
        "Have all polyps been removed?",
        "Is this finding easy to detect?",
        "Is there a green/black box artifact?",
        "Is there text?",
        "What color is the abnormality?",
        "What color is the anatomical landmark?",
        "How many findings are present?",
        "How many polyps are in the image?",
        "How many instruments are in the image?",
        "Where in the image is the abnormality?",
        "Where in the image is the instrument?",
        "Are there any abnormalities in the image?",
        "Are there any anatomical landmarks in the image?",
        "Are there any instruments in the image?",
        "Where in the image is the anatomical landmark?",
        "What is the size of the polyp?",
        "What type of polyp is present?",
    };
    return questions;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

AnswerVocabulary::AnswerVocabulary(std::vector<std::string> answers) {
    for (auto& a : answers) a = trim(a);
    std::sort(answers.begin(), answers.end());
    answers.erase(std::unique(answers.begin(), answers.end()), answers.end());
    answers_ = std::move(answers);
    for (std::size_t i = 0; i < answers_.size(); ++i) index_.emplace(answers_[i], i);
}

std::optional<std::size_t> AnswerVocabulary::find(std::string_view answer) const {
    const auto it = index_.find(answer);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::uint64_t AnswerVocabulary::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    for (const auto& a : answers_) {
        for (unsigned char c : a) mix(c);
        mix('\n');
    }
    return h;
}

std::array<std::size_t, 3> split_counts(std::size_t n, const SplitRatios& ratios) {
    const double r[3] = {ratios.train, ratios.val, ratios.test};
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double quota = r[i] * static_cast<double>(n);
        const double whole = std::floor(quota + 1e-9);
        counts[i] = static_cast<std::size_t>(whole);
        remainder[i] = quota - whole;
        assigned += counts[i];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b] + 1e-12; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++counts[order[k % 3]];
    return counts;
}

SplitResult stratified_split(std::span<const ImageEntry> entries, std::uint64_t seed, const SplitRatios& ratios) {
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
        throw std::invalid_argument("split ratios must be non-negative and sum to 1");
    }
    std::map<std::string, std::vector<std::size_t>> classes;
    std::set<std::string> ids;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].abnormality.empty()) {
            throw std::invalid_argument("image '" + entries[i].image_id + "' has no abnormality label");
        }
        if (!ids.insert(entries[i].image_id).second) {
            throw std::invalid_argument("duplicate image_id '" + entries[i].image_id + "'");
        }
        classes[entries[i].abnormality].push_back(i);
    }

    SplitResult result;
    std::vector<int> assignment(entries.size(), 0);
    std::mt19937_64 rng(seed);
    for (auto& [name, members] : classes) {
        if (members.size() < 3) {
            result.warnings.push_back("class '" + name + "' has " + std::to_string(members.size()) +
                                      " member(s); assigned to train without stratification");
            continue;
        }
        std::shuffle(members.begin(), members.end(), rng);
        const auto counts = split_counts(members.size(), ratios);
        for (std::size_t k = 0; k < members.size(); ++k) {
            assignment[members[k]] = k < counts[0] ? 0 : (k < counts[0] + counts[1] ? 1 : 2);
        }
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& bucket = assignment[i] == 0 ? result.train : (assignment[i] == 1 ? result.val : result.test);
        bucket.push_back(entries[i]);
    }
    return result;
}

AnswerIndex index_answers(std::span<const QARecord> records) {
    AnswerIndex index;
    for (const auto& r : records) {
        auto& slot = index[{r.image_id, r.question_id}];
        slot.insert(r.answers.begin(), r.answers.end());
    }
    return index;
}

std::vector<QARecord> expand_qa(std::span<const ImageEntry> entries, std::span<const std::string> questions,
                                const AnswerIndex* known) {
    std::vector<QARecord> out;
    out.reserve(entries.size() * questions.size());
    for (const auto& e : entries) {
        for (std::size_t q = 0; q < questions.size(); ++q) {
            QARecord rec{e.image_id, static_cast<int>(q), questions[q], {}};
            if (known) {
                const auto it = known->find({e.image_id, static_cast<int>(q)});
                if (it == known->end()) {
                    throw DataError("no answers for image '" + e.image_id + "' question " + std::to_string(q));
                }
                rec.answers = it->second;
            }
            out.push_back(std::move(rec));
        }
    }
    return out;
}

AnswerVocabulary build_vocabulary(std::span<const QARecord> records) {
    std::vector<std::string> all;
    for (const auto& r : records) all.insert(all.end(), r.answers.begin(), r.answers.end());
    return AnswerVocabulary(std::move(all));
}

LabelVector binarize(const AnswerSet& answers, const AnswerVocabulary& vocab) {
    LabelVector bits(vocab.size(), 0);
    for (const auto& a : answers) {
        const auto i = vocab.find(a);
        if (!i) throw std::invalid_argument("answer '" + a + "' is not in the vocabulary");
        bits[*i] = 1;
    }
    return bits;
}

AnswerSet debinarize(const LabelVector& bits, const AnswerVocabulary& vocab) {
    if (bits.size() != vocab.size()) {
        throw std::invalid_argument("label vector has " + std::to_string(bits.size()) + " bits, vocabulary has " +
                                    std::to_string(vocab.size()));
    }
    AnswerSet out;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) out.insert(vocab[i]);
    }
    return out;
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

// Calls `fn(object)` for every non-blank line; wraps parse and schema errors
// with the file name and line number.
template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
    auto in = open_input(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        try {
            const json obj = json::parse(line);
            if (!obj.is_object()) throw std::invalid_argument("expected a JSON object");
            fn(obj);
        } catch (const std::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

}  // namespace

std::vector<ImageEntry> read_image_manifest(const std::filesystem::path& path) {
    std::vector<ImageEntry> out;
    for_each_jsonl(path, [&](const json& obj) {
        ImageEntry e;
        e.image_id = obj.at("image_id").get<std::string>();
        e.path = obj.value("path", std::string{});
        e.abnormality = obj.at("abnormality").get<std::string>();
        e.has_black_box = obj.value("has_black_box", false);
        out.push_back(std::move(e));
    });
    return out;
}

void write_image_manifest(std::span<const ImageEntry> entries, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& e : entries) {
        const json obj = {{"image_id", e.image_id},
                          {"path", e.path},
                          {"abnormality", e.abnormality},
                          {"has_black_box", e.has_black_box}};
        out << obj.dump() << '\n';
    }
}

std::vector<QARecord> read_qa_manifest(const std::filesystem::path& path) {
    std::vector<QARecord> out;
    for_each_jsonl(path, [&](const json& obj) {
        QARecord r;
        r.image_id = obj.at("image_id").get<std::string>();
        r.question_id = obj.at("question_id").get<int>();
        if (r.question_id < 0 || r.question_id >= kQuestionCount) {
            throw std::invalid_argument("question_id " + std::to_string(r.question_id) + " out of range");
        }
        r.question = obj.value("question", standard_questions()[static_cast<std::size_t>(r.question_id)]);
        for (const auto& a : obj.at("answers")) r.answers.insert(trim(a.get<std::string>()));
        out.push_back(std::move(r));
    });
    return out;
}

void write_qa_manifest(std::span<const QARecord> records, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& r : records) {
        const json obj = {{"image_id", r.image_id},
                          {"question_id", r.question_id},
                          {"question", r.question},
                          {"answers", std::vector<std::string>(r.answers.begin(), r.answers.end())}};
        out << obj.dump() << '\n';
    }
}

AnswerVocabulary read_vocabulary(const std::filesystem::path& path) {
    auto in = open_input(path);
    std::vector<std::string> answers;
    std::string line;
    while (std::getline(in, line)) {
        std::string a = trim(line);
        if (!a.empty()) answers.push_back(std::move(a));
    }
    AnswerVocabulary vocab(answers);
    if (vocab.answers() != answers) {
        throw DataError("vocabulary '" + path.string() + "' is not sorted and duplicate-free");
    }
    return vocab;
}

void write_vocabulary(const AnswerVocabulary& vocab, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& a : vocab.answers()) out << a << '\n';
}

}  // namespace endovqa::dataprep
