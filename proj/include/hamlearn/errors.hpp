#pragma once

#include <stdexcept>
#include <string>

namespace hamlearn {

/// Raised when a caller violates an operation's preconditions
/// (dimension mismatch, invalid hyperparameter, duplicate anchor, ...).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A regularized symmetric system could not be factorized even at the
/// largest jitter on the ladder.
class SingularSystemError : public std::runtime_error {
public:
    SingularSystemError(const std::string &what, std::size_t size, double trace, double min_diagonal, double last_ridge)
        : std::runtime_error(what), size_(size), trace_(trace), min_diagonal_(min_diagonal), last_ridge_(last_ridge) {}

    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] double trace() const { return trace_; }
    [[nodiscard]] double min_diagonal() const { return min_diagonal_; }
    [[nodiscard]] double last_ridge() const { return last_ridge_; }

private:
    std::size_t size_;
    double trace_;
    double min_diagonal_;
    double last_ridge_;
};

}  // namespace hamlearn
