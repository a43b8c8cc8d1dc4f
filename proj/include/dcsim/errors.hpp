#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dcsim {

/// Base class of every error raised by the simulator.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// config

class SyntaxError : public Error {
public:
    using Error::Error;
};

/// Missing key or wrong type; `key()` names the offending config key.
class SchemaError : public Error {
public:
    SchemaError(std::string key, const std::string& what)
        : Error("config key '" + key + "': " + what), key_(std::move(key)) {}
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

// numerical contracts

class DomainError : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    LengthMismatch(const std::string& what, std::size_t expected, std::size_t got)
        : Error(what + ": expected length " + std::to_string(expected) + ", got " +
                std::to_string(got)) {}
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

// environment

class IndexError : public Error {
public:
    using Error::Error;
};

class NotReset : public Error {
public:
    using Error::Error;
};

// time-series ingestion

/// Malformed CSV cell. Rows are 1-based file lines (header is line 1).
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::size_t column, const std::string& what)
        : Error("line " + std::to_string(row) + ", column " + std::to_string(column) + ": " +
                what),
          row_(row), column_(column) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

class OrderError : public Error {
public:
    OrderError(std::size_t row, const std::string& what)
        : Error("line " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

class RangeError : public ParseError {
public:
    using ParseError::ParseError;
};

class CoverageError : public Error {
public:
    using Error::Error;
};

class GapError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace dcsim
