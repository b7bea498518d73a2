#pragma once

#include <stdexcept>
#include <string>

namespace hierarch {

/// Base of every domain error raised by the library. The CLI maps these to
/// exit code 1; anything else escaping is a bug.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input data (machine tables, words, presentations, fixtures).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Structurally wrong argument, e.g. a formula prefix of the wrong shape.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A configured enumeration cap was exceeded.
class CapExceeded : public Error {
public:
    using Error::Error;
};

/// Requested capability that cannot be provided (e.g. genuine higher oracles).
class Unsupported : public Error {
public:
    using Error::Error;
};

/// A file could not be read or written; the message names the path.
class IoError : public Error {
public:
    using Error::Error;
};

class NotQuantified : public Error {
public:
    using Error::Error;
};

class EmbeddingRequired : public Error {
public:
    using Error::Error;
};

/// An exact oracle table was asked a question it has no entry for.
class OracleIncomplete : public Error {
public:
    OracleIncomplete(const std::string& query)
        : Error("oracle table has no entry for query: " + query), query_(query) {}
    const std::string& query() const noexcept { return query_; }

private:
    std::string query_;
};

/// A kernel evaluation ran past its step budget.
class KernelTimeout : public Error {
public:
    explicit KernelTimeout(const std::string& point, const std::string& context = {})
        : Error("kernel evaluation exceeded its budget at " + point + (context.empty() ? "" : " (" + context + ")")),
          point_(point) {}
    const std::string& point() const noexcept { return point_; }

private:
    std::string point_;
};

}  // namespace hierarch
