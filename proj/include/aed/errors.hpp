#pragma once

#include <stdexcept>
#include <string>

namespace aed {

/// Invalid configuration, bad parameter values, malformed requests.
/// The CLI maps this to exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Missing or unreadable data, malformed input files, shape mismatches.
/// The CLI maps this to exit code 3.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace aed
