#pragma once

#include <stdexcept>
#include <string>

namespace clab {

// Invalid configuration, CLI arguments, or input files. Mapped to exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite loss or iterate during a run. Mapped to exit code 2.
struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace clab
