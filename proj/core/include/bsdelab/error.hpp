#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bsde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter violated an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A checkable mathematical precondition failed (non-concave input,
/// non-star-shaped table, ...). The message carries the offending data.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// The Osgood ladder could not decide and the caller needed a decision.
class InconclusiveError : public Error {
public:
    using Error::Error;
};

class ImplicitSolveError : public Error {
public:
    ImplicitSolveError(std::size_t node, std::size_t path_batch, double residual, const std::string& what)
        : Error(what), node_(node), path_batch_(path_batch), residual_(residual) {}

    std::size_t node() const noexcept { return node_; }
    std::size_t path_batch() const noexcept { return path_batch_; }
    double residual() const noexcept { return residual_; }

private:
    std::size_t node_;
    std::size_t path_batch_;
    double residual_;
};

class RegressionError : public Error {
public:
    RegressionError(std::size_t node, double condition_estimate, const std::string& what)
        : Error(what), node_(node), condition_(condition_estimate) {}

    std::size_t node() const noexcept { return node_; }
    double condition_estimate() const noexcept { return condition_; }

private:
    std::size_t node_;
    double condition_;
};

/// Failure while evaluating a user generator/terminal, tagged with the sample.
class EvaluationError : public Error {
public:
    using Error::Error;
};

}  // namespace bsde
