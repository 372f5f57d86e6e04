#pragma once

#include <stdexcept>
#include <string>

namespace hiertree {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorCode : int {
    validation = 2, // malformed input, broken invariant, bad configuration
    io = 3,         // missing or unreadable/unwritable files
    numeric = 4,    // degenerate or undefined numeric operation
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(code_); }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail_validation(const std::string& msg) {
    throw Error(ErrorCode::validation, msg);
}

[[noreturn]] inline void fail_io(const std::string& msg) {
    throw Error(ErrorCode::io, msg);
}

[[noreturn]] inline void fail_numeric(const std::string& msg) {
    throw Error(ErrorCode::numeric, msg);
}

} // namespace hiertree
