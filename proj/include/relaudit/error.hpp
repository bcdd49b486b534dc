#pragma once

#include <stdexcept>
#include <string>

namespace relaudit {

/// Library-level failure (bad config, malformed file, numeric blow-up).
/// CLI maps these to exit code 1; argument problems are handled separately.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace relaudit
