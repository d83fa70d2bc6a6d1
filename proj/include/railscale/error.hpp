#pragma once

#include <stdexcept>
#include <string>

namespace railscale {

// Base for everything the library throws on bad input or failed evaluation.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or input file content (CLI maps this to exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// A voltage or other argument outside the range a model was characterized for.
class RangeError : public Error {
public:
    using Error::Error;
};

} // namespace railscale
