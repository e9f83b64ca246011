#pragma once

#include <stdexcept>
#include <string>

namespace ville {

/// Invalid configuration: malformed family files, bad threshold rules,
/// out-of-range parameters. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Access to a family index that does not exist (finite family without
/// a tail rule, or index < 1).
class UndefinedIndexError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

} // namespace ville
