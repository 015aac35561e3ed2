#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace svs {

enum class ErrorCode {
    InvalidArgument,
    ShapeMismatch,
    MalformedHeader,
    TruncatedPayload,
    UnsupportedFormat,
    Io,
    NonFinite,
    EmptySelection,
    Divergence,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Wraps an error raised inside one pipeline stage.
class StageError : public Error {
public:
    StageError(std::string stage, const Error& inner)
        : Error(inner.code(), stage + ": " + inner.what()), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const char* what) {
    if (!cond) fail(code, what);
}

}  // namespace detail
}  // namespace svs
