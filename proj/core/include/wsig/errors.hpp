#pragma once

#include <stdexcept>
#include <string>

namespace wsig {

// Shapes of two operands disagree (alphabet, level, column count, ...).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A non-finite intermediate or a failed factorization.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
class TrainingError : public NumericError {
public:
    TrainingError(const std::string& what, std::size_t epoch)
        : NumericError(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

    std::size_t epoch() const noexcept { return epoch_; }

private:
    std::size_t epoch_;
};

// File or configuration problems; the CLI maps these to exit status 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wsig
