#pragma once

#include <stdexcept>
#include <string>

namespace qfuse {

/// Base class for all qfuse errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid argument or precondition violation.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& msg) : Error(msg) {}
};

/// A fully decohered sensor (V = 0) carries no phase information.
class DivergentVariance : public Error {
public:
    explicit DivergentVariance(const std::string& msg) : Error(msg) {}
};

/// Outlier exclusion removed every sensor.
class NoSurvivors : public Error {
public:
    explicit NoSurvivors(const std::string& msg) : Error(msg) {}
};

/// All fusion weights are zero.
class NoInformation : public Error {
public:
    explicit NoInformation(const std::string& msg) : Error(msg) {}
};

/// Fault count exceeds what the fault-tolerance strategy admits.
class FaultBudgetExceeded : public Error {
public:
    explicit FaultBudgetExceeded(const std::string& msg) : Error(msg) {}
};

/// Unreadable input stream or missing data file.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

} // namespace qfuse
