#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace uavpower {

/// Bad arguments or data that violate a documented precondition.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed text input. `row()` is the 1-based data row, 0 when the
/// problem is not tied to a row (empty file, bad header, metadata).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row = 0)
        : std::runtime_error(row == 0 ? what : "row " + std::to_string(row) + ": " + what),
          row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

/// A computation produced a value it must never produce (non-positive
/// radicand, non-finite power) or a search failed to find an optimum.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace uavpower
