#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace valp {

enum class ErrorKind {
    CycleDetected,
    UnknownId,
    InvalidSpec,
    RowMismatch,
    EmptyInput,
    MissingInput,
    InfeasibleBudget,
    NoEligibleInput,
    DtypeMismatch,
    UnknownInitializer,
    UnknownActivation,
    ShapeMismatch,
    DomainError,
    OddWidth,
    InvalidGraph,
    NonFiniteLoss,
    Unconditioned,
    LengthMismatch,
    EmptyLabels,
    FloorNotMet,
    BadMagic,
    TruncatedFile,
    DimMismatch,
    MissingColumn,
    Io,
    Parse,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library. `kind()` identifies the contract
/// error; the message carries the offending component or value.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace valp
