#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bvs {

enum class ErrorKind {
    Io,
    Parse,
    Validation,
    RankDeficiency,
    DegenerateResponse,
    Integration,
    Classification,
    Construction,
    InvariantViolation,
    Estimation,
    Initialization,
    Refusal,
    Undefined,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every failure raised by the library carries the module that produced it and
// a machine-readable kind; the CLI maps both onto exit codes and error JSON.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string module, const std::string& message)
        : std::runtime_error(message), kind_(kind), module_(std::move(module)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& module() const noexcept { return module_; }

private:
    ErrorKind kind_;
    std::string module_;
};

}  // namespace bvs
