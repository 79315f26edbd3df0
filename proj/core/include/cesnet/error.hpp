#pragma once

#include <stdexcept>
#include <string>

namespace cesnet {

/// Malformed or inconsistent input (files, configuration, arguments).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a valid result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cesnet
