#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "endovqa/dataprep.hpp"
#include "endovqa/fusion.hpp"

namespace endovqa::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2 };

/// Entry point shared by the executable and the tests. argv[0] is the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

/// Image file for `image_id` under `dir`: the id itself, or the id with a
/// .png / .jpg / .jpeg suffix, whichever exists first.
std::filesystem::path resolve_image(const std::filesystem::path& dir, const std::string& image_id);

/// Training samples for QA records, one per record. Image features are
/// computed once per distinct image, in parallel.
std::vector<fusion::Sample> build_samples(std::span<const dataprep::QARecord> records,
                                          const std::filesystem::path& image_dir,
                                          const dataprep::AnswerVocabulary& vocab);

}  // namespace endovqa::cli
