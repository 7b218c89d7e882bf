#pragma once

#include <stdexcept>
#include <string>

namespace featbench {

/// Invalid or inconsistent configuration (bad config file, bad parameters).
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Problems with input data (missing files, malformed content, contract
/// violations discovered while processing). The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace featbench
