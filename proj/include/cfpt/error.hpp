#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cfpt {

/// Coarse error classes; the CLI prints these as a machine-parsable tag.
enum class ErrorKind {
    InvalidArgument,  // bad value passed to a library call
    Schema,           // malformed input file row
    Mismatch,         // inconsistent inputs (lengths, ids, shapes)
    Config,           // bad or missing configuration
    Io,               // filesystem failure
    Undefined,        // statistic undefined for the given data
};

constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Mismatch: return "mismatch";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    case ErrorKind::Undefined: return "undefined";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

}  // namespace cfpt
