#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "endovqa/blackmask.hpp"
#include "endovqa/fusion.hpp"

namespace endovqa {

/// Every tunable of the pipeline and trainer. Values are layered as
/// defaults, then a key=value config file, then command-line overrides; the
/// last writer wins.
struct RunConfig {
    blackmask::EnhanceConfig enhance;
    fusion::TrainConfig train;

    /// Assign one parameter by key. Throws std::invalid_argument naming the
    /// key for unknown keys or unparsable values.
    void set(std::string_view key, std::string_view value);

    /// Parse "key=value" lines; '#' starts a comment. Errors carry the line number.
    void load_file(const std::filesystem::path& path);

    /// Throws std::invalid_argument naming the first invalid field.
    void validate() const;

    static std::vector<std::string> keys();
};

}  // namespace endovqa
