#pragma once

#include <stdexcept>
#include <string>

namespace ood {

// Bad inputs: precondition violations, malformed records, invalid configs.
// The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Environment problems: missing files, unreadable/unwritable paths.
// The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ood
