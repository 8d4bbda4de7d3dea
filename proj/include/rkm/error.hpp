#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rkm {

/// A precondition on an input was violated.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Components differ only by a scaling of their covariance, so the
/// covariance-angle statistic is zero. Cluster by radius instead.
class DegenerateSeparationError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// The model contains something a closed form does not cover.
class UnsupportedModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative method ran out of iterations. Carries the last iterate so
/// callers can inspect how far it got.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, Eigen::VectorXd last_iterate, double last_estimate)
        : std::runtime_error(what), last_iterate_(std::move(last_iterate)), last_estimate_(last_estimate) {}

    const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
    double last_estimate() const noexcept { return last_estimate_; }

private:
    Eigen::VectorXd last_iterate_;
    double last_estimate_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace rkm
