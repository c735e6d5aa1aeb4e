#pragma once

#include <stdexcept>
#include <string>

namespace flowgate {

/// Invalid configuration, arguments, or missing inputs. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed data or a failure while processing it. The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace flowgate
