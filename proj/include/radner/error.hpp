#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace radner {

// Base of everything the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameters outside the model's domain (beta_tilde <= 0, lambda outside [0,1), ...).
class InvalidParams : public Error {
public:
    using Error::Error;
};

// Evaluation of a function outside its domain, e.g. a non-positive rate.
class DomainError : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

// A theorem hypothesis does not hold (bank check with lambda = 0).
class PreconditionViolated : public Error {
public:
    using Error::Error;
};

// The operation needs a trading regime and the inputs produce another one.
class RegimeMismatch : public Error {
public:
    using Error::Error;
};

// Solution and income paths were built from different inputs.
class MismatchedInputs : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::vector<std::string> problems)
        : Error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out;
        for (const auto& s : items) {
            if (!out.empty()) out += "; ";
            out += s;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

} // namespace radner
