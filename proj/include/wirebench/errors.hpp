#pragma once

#include <stdexcept>
#include <string>

namespace wirebench {

// Base class for all wirebench failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration or command line usage. CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

// Filesystem / output failures. CLI exit code 3.
struct IoError : Error {
    using Error::Error;
};

// Connection setup, handshake or data-path failures. CLI exit code 4.
struct TransportError : Error {
    using Error::Error;
};

// A benchmark run that started but could not finish (bad completion,
// echo mismatch, watchdog abort). Recorded per CSV row, sweep continues.
struct EngineError : Error {
    using Error::Error;
};

}  // namespace wirebench
