#pragma once

#include <stdexcept>
#include <string>

namespace distinct {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input file. `row` is the zero-based record index, or -1 when the
// problem is not tied to a record (header, magic, truncated file).
class FormatError : public Error {
public:
    FormatError(const std::string& what, long row = -1)
        : Error(row >= 0 ? what + " (row " + std::to_string(row) + ")" : what), row_(row) {}

    [[nodiscard]] long row() const noexcept { return row_; }

private:
    long row_;
};

// Precondition violated by the caller (sizes, labels, parameter ranges).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Median pairwise distance is zero, so no RBF bandwidth can be derived.
class DegenerateBandwidth : public Error {
public:
    using Error::Error;
};

}  // namespace distinct
