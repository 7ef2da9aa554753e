#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssgcn {

/// Input data could not be used (missing file, inconsistent rows, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(const std::string& file, std::size_t line, const std::string& what)
        : DataError(file + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Training produced a non-finite loss.
class NumericalError : public std::runtime_error {
public:
    NumericalError(int epoch, const std::string& what)
        : std::runtime_error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

} // namespace ssgcn
