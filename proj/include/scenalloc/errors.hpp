#pragma once

#include <cstdarg>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace scenalloc {

enum class ErrorKind {
    Schema,            // malformed file header / layout
    Data,              // bad cell value, unsorted dates, non-positive price
    InsufficientData,  // too few rows/samples for the operation
    Parameter,         // bad argument (perplexity, reversed range, ...)
    Shape,             // dimension mismatch
    Numeric,           // non-finite values where finite required
    EmptyWindow,       // date slice selected nothing
    Io,                // file not found / unreadable
    Config,            // config file problems
    Internal,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, std::string msg) : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

  private:
    ErrorKind kind_;
};

// printf-style std::string builder, used for error messages throughout.
inline std::string strfmt(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    va_list copy;
    va_copy(copy, args);
    int n = std::vsnprintf(nullptr, 0, fmt, copy);
    va_end(copy);
    std::string out(n > 0 ? static_cast<size_t>(n) : 0, '\0');
    if (n > 0) std::vsnprintf(out.data(), out.size() + 1, fmt, args);
    va_end(args);
    return out;
}

inline const char* error_kind_name(ErrorKind k) {
    switch (k) {
        case ErrorKind::Schema: return "schema";
        case ErrorKind::Data: return "data";
        case ErrorKind::InsufficientData: return "insufficient_data";
        case ErrorKind::Parameter: return "parameter";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::EmptyWindow: return "empty_window";
        case ErrorKind::Io: return "io";
        case ErrorKind::Config: return "config";
        case ErrorKind::Internal: return "internal";
    }
    return "unknown";
}

}  // namespace scenalloc
