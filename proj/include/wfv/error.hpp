#pragma once

#include <stdexcept>
#include <string>

namespace wfv {

/// Raised when the modeled system does something the semantics forbid
/// (unbound name, index out of range, division by zero, blocking d_step, ...).
/// Checkers turn it into a MODEL_ERROR verdict.
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

struct SourcePos {
    int line = 0;
    int column = 0;
};

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(SourcePos pos, const std::string& message)
        : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + message),
          pos_(pos), message_(message) {}

    SourcePos pos() const { return pos_; }
    const std::string& message() const { return message_; }

private:
    SourcePos pos_;
    std::string message_;
};

/// apply_transition was handed a move that is not currently enabled.
class IllegalTransition : public std::logic_error {
public:
    explicit IllegalTransition(const std::string& what) : std::logic_error(what) {}
};

class CompileError : public std::runtime_error {
public:
    explicit CompileError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace wfv
