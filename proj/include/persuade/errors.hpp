#pragma once

#include <stdexcept>
#include <string>

namespace persuade {

// Base for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// A model assumption does not hold for the given instance (CLI exit code 3).
class AssumptionViolation : public Error {
public:
    AssumptionViolation(std::string assumption, const std::string& what)
        : Error(what), assumption_(std::move(assumption)) {}
    const std::string& assumption() const { return assumption_; }

private:
    std::string assumption_;
};

struct AssumptionGViolated : AssumptionViolation {
    explicit AssumptionGViolated(const std::string& what)
        : AssumptionViolation("unique optimal action", what) {}
};

struct AssumptionDViolated : AssumptionViolation {
    explicit AssumptionDViolated(const std::string& what)
        : AssumptionViolation("weakly dominated action", what) {}
};

struct NoDistinguishablePair : AssumptionViolation {
    explicit NoDistinguishablePair(const std::string& what)
        : AssumptionViolation("distinguishable states", what) {}
};

struct PriorSupportViolated : AssumptionViolation {
    explicit PriorSupportViolated(const std::string& what)
        : AssumptionViolation("prior lower bound", what) {}
};

struct ZeroProbabilitySignal : Error {
    using Error::Error;
};
struct NotDirect : Error {
    using Error::Error;
};
struct NumericalFailure : Error {
    using Error::Error;
};
struct SenderPreferenceViolated : Error {
    using Error::Error;
};
struct PriorPrefersAction1 : Error {
    using Error::Error;
};
struct StrengthOutOfRange : Error {
    using Error::Error;
};
struct DecompositionInfeasible : Error {
    using Error::Error;
};
struct NotPersuasiveInput : Error {
    using Error::Error;
};
struct PreconditionEpsTooLarge : Error {
    using Error::Error;
};
struct IncompatibleLearner : Error {
    using Error::Error;
};
struct RejectionBudgetExceeded : Error {
    using Error::Error;
};
struct UnsupportedShape : Error {
    using Error::Error;
};
struct InvalidGrid : Error {
    using Error::Error;
};

// Config / input-file problems (CLI exit code 2).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace persuade
