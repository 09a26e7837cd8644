#pragma once

#include <stdexcept>
#include <string>

namespace primeforms {

// Bad input: malformed configs, violated preconditions.  CLI exit code 1.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Work or memory guard tripped.  CLI exit code 2.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace primeforms
