#pragma once

#include <stdexcept>
#include <string>

namespace fnet {

// CLI exit code 1.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

// CLI exit code 2: unreadable/malformed files, bad datasets.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// CLI exit code 3: NaN losses, divergence, singular configurations.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fnet
