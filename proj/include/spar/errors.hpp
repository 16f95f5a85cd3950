#ifndef SPAR_ERRORS_HPP
#define SPAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file layout (ragged rows, wrong column count).
class FormatError : public Error {
public:
    using Error::Error;
};

/// A cell that does not parse as a finite decimal real.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column)
        : Error(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Violated precondition: mismatched dimensions, non-orthonormal basis, bad index.
class ContractError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Failure of an underlying numerical routine.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace spar

#endif  // SPAR_ERRORS_HPP
