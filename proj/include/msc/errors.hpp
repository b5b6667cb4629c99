#pragma once

#include <stdexcept>
#include <string>

namespace msc {

// Every failure mode carries a stable code so callers (and the CLI exit
// status) can distinguish error families without parsing messages.
enum class ErrorCode {
    io_error,
    malformed_csv,
    duplicate_id,
    vocabulary_violation,
    non_finite_value,
    invalid_argument,
    empty_input,
    id_mismatch,
    zero_degree_row,
    eigen_failure,
};

enum class ErrorFamily { validation, io, numeric };

inline ErrorFamily family_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::io_error:
            return ErrorFamily::io;
        case ErrorCode::zero_degree_row:
        case ErrorCode::eigen_failure:
            return ErrorFamily::numeric;
        default:
            return ErrorFamily::validation;
    }
}

// Process exit codes: 2 validation, 3 I/O, 4 numeric. 1 is reserved for
// unexpected internal failures.
inline int exit_code_for(ErrorFamily family) {
    switch (family) {
        case ErrorFamily::validation: return 2;
        case ErrorFamily::io: return 3;
        case ErrorFamily::numeric: return 4;
    }
    return 1;
}

class MscError : public std::runtime_error {
public:
    MscError(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    ErrorFamily family() const noexcept { return family_of(code_); }

private:
    ErrorCode code_;
};

}  // namespace msc
