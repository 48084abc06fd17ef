#pragma once

#include <stdexcept>
#include <string>

namespace wser {

/// Bad arguments, malformed configuration or CLI usage.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data that cannot be processed: unreadable files, bad labels,
/// signals too short for the requested depth.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wser
