#pragma once

#include <stdexcept>
#include <string>

namespace nmsim {

/// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
    config = 2,
    capacity = 3,
    routing = 4,
    numeric = 5,
    causality = 6,
    calibration = 7,
};

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string &what)
            : std::runtime_error(what)
            , kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

class ConfigError : public Error
{
public:
    explicit ConfigError(const std::string &what)
            : Error(ErrorKind::config, what)
    {
    }
};

class CapacityError : public Error
{
public:
    explicit CapacityError(const std::string &what)
            : Error(ErrorKind::capacity, what)
    {
    }
};

class RoutingFault : public Error
{
public:
    explicit RoutingFault(const std::string &what)
            : Error(ErrorKind::routing, what)
    {
    }
};

class NumericFault : public Error
{
public:
    explicit NumericFault(const std::string &what)
            : Error(ErrorKind::numeric, what)
    {
    }
};

class CausalityError : public Error
{
public:
    explicit CausalityError(const std::string &what)
            : Error(ErrorKind::causality, what)
    {
    }
};

} // namespace nmsim
