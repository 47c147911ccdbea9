#pragma once

#include <stdexcept>
#include <string>

namespace endovqa {

/// Raised when an input file or record is missing, unreadable or malformed.
/// The CLI maps it to exit code 2; std::invalid_argument maps to 1.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace endovqa
