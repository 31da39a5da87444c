#pragma once

#include <stdexcept>
#include <string>

namespace netfactor {

/// Broad failure categories; the CLI maps these onto exit codes.
enum class ErrorKind {
    Parameter,      ///< dimension mismatch, invalid option or configuration
    Parse,          ///< malformed input file
    Degeneracy,     ///< rank deficiency, singular Gram matrix, structural impossibility
    Tie,            ///< eigenvalue/element ties where distinctness is required
    Numeric,        ///< non-convergence, non-finite values, empty spectrum
    Selection,      ///< dimension selection impossible (flat scree)
    Decomposition,  ///< probability matrix not PSD after double centering
    Resource        ///< allocation or I/O resource failure
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& what) : Error(ErrorKind::Parameter, what) {}
};

class DegeneracyError : public Error {
public:
    explicit DegeneracyError(const std::string& what) : Error(ErrorKind::Degeneracy, what) {}
};

class TieError : public Error {
public:
    explicit TieError(const std::string& what) : Error(ErrorKind::Tie, what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class SelectionError : public Error {
public:
    explicit SelectionError(const std::string& what) : Error(ErrorKind::Selection, what) {}
};

class DecompositionError : public Error {
public:
    explicit DecompositionError(const std::string& what) : Error(ErrorKind::Decomposition, what) {}
};

/// Parse failure with a 1-based location (0 when unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& what, long line = 0, long column = 0);
    long line() const noexcept { return line_; }
    long column() const noexcept { return column_; }

private:
    long line_;
    long column_;
};

class ResourceError : public Error {
public:
    explicit ResourceError(const std::string& what) : Error(ErrorKind::Resource, what) {}
};

}  // namespace netfactor
