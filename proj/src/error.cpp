#include "netfactor/error.hpp"

namespace netfactor {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::Parameter: return "parameter";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Degeneracy: return "degeneracy";
    case ErrorKind::Tie: return "tie";
    case ErrorKind::Numeric: return "numeric";
    case ErrorKind::Selection: return "selection";
    case ErrorKind::Decomposition: return "decomposition";
    case ErrorKind::Resource: return "resource";
    }
    return "unknown";
}

namespace {

std::string with_location(const std::string& what, long line, long column) {
    if (line <= 0) return what;
    std::string out = "line " + std::to_string(line);
    if (column > 0) out += ", column " + std::to_string(column);
    return out + ": " + what;
}

}  // namespace

ParseError::ParseError(const std::string& what, long line, long column)
    : Error(ErrorKind::Parse, with_location(what, line, column)), line_(line), column_(column) {}

}  // namespace netfactor
