#ifndef EAAS_ERRORS_H
#define EAAS_ERRORS_H

#include <stdexcept>
#include <string>

namespace eaas {

/// A parameter is outside the domain where the model is defined.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A computation would exceed a configured size cap.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A function was called outside the regime its closed form was derived for.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Malformed input file. Carries a 1-based row and column when known (0 = unknown).
struct ParseError : std::runtime_error {
    ParseError(const std::string &msg, std::size_t row, std::size_t col)
        : std::runtime_error(msg), row(row), col(col) {
    }
    std::size_t row;
    std::size_t col;
};

}  // namespace eaas

#endif
