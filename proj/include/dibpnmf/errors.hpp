// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dibpnmf {

/// Argument outside the support or parameter space of a distribution.
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Caller broke a documented precondition (shape mismatch, empty input...).
class ContractViolation : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

/// A deterministic numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line and column when known
/// (0 means "not applicable").
class ParseError : public std::runtime_error {
  public:
    ParseError(const std::string& what, std::size_t line = 0,
               std::size_t column = 0)
        : std::runtime_error(format(what, line, column)), line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

    /// Same location, message prefixed with "context: ".
    ParseError with_context(const std::string& context) const {
        return ParseError(Raw{}, context + ": " + what(), line_, column_);
    }

  private:
    struct Raw {};
    ParseError(Raw, const std::string& msg, std::size_t line, std::size_t column)
        : std::runtime_error(msg), line_(line), column_(column) {}

    static std::string format(const std::string& what, std::size_t line,
                              std::size_t column) {
        std::string msg;
        if (line > 0) {
            msg = "line " + std::to_string(line);
            if (column > 0)
                msg += ", column " + std::to_string(column);
            msg += ": ";
        }
        return msg + what;
    }

    std::size_t line_;
    std::size_t column_;
};

/// Snapshot written by an incompatible format version.
class VersionError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The Gibbs sampler produced a non-finite quantity.
class SamplerAbort : public std::runtime_error {
  public:
    SamplerAbort(std::size_t iteration, std::string family)
        : std::runtime_error("non-finite state at iteration " +
                             std::to_string(iteration) + " after " + family +
                             " update"),
          iteration_(iteration), family_(std::move(family)) {}

    std::size_t iteration() const noexcept { return iteration_; }
    const std::string& family() const noexcept { return family_; }

  private:
    std::size_t iteration_;
    std::string family_;
};

#define DIBPNMF_REQUIRE(cond, msg)                                             \
    do {                                                                       \
        if (!(cond))                                                           \
            throw ::dibpnmf::ContractViolation(msg);                           \
    } while (false)

} // namespace dibpnmf
