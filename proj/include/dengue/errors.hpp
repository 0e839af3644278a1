#ifndef DENGUE_ERRORS_HPP
#define DENGUE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dengue {

/// Invalid inputs: parameter bounds, malformed scenario text, or a call made
/// outside an operation's domain (e.g. asking for R0 where it is undefined).
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Scenario-text error; carries the 1-based line number.
class parse_error : public domain_error {
public:
    parse_error(const std::string& what_arg, int line)
        : domain_error("line " + std::to_string(line) + ": " + what_arg), line_(line)
    {
    }
    int line() const noexcept { return line_; }

private:
    int line_;
};

/// Failure of a numerical procedure: integration abort, solver divergence,
/// eigenvalue iteration trouble.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// The root finder converged to a disease-free state when an interior
/// (endemic) root was requested. Callers may retry with a different guess.
class collapsed_to_dfe_error : public numeric_error {
public:
    explicit collapsed_to_dfe_error(const std::string& what_arg) : numeric_error(what_arg) {}
};

/// Two independent routes that must agree (eigenvalue verdict vs. the R0
/// test at a disease-free equilibrium) produced different answers.
class consistency_error : public numeric_error {
public:
    explicit consistency_error(const std::string& what_arg) : numeric_error(what_arg) {}
};

} // namespace dengue

#endif // DENGUE_ERRORS_HPP
