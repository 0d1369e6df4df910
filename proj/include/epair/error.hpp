#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace epair
{
//! Base of every error raised by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

//! Argument outside the mathematical domain of an operation.
class DomainError : public Error
{
  public:
    using Error::Error;
};

//! Caller violated a documented precondition (e.g. unsorted input).
class ContractError : public Error
{
  public:
    using Error::Error;
};

//! Quadrature grid too coarse for the oscillating integrand.
class ResolutionError : public Error
{
  public:
    using Error::Error;
};

//! Measured rate at or beyond the dead-time saturation limit.
class SaturationError : public Error
{
  public:
    using Error::Error;
};

//! Configuration is malformed or physically invalid.
class ConfigError : public Error
{
  public:
    using Error::Error;
};

//! Physics configuration outside the model's validity range.
class ModelValidityError : public ConfigError
{
  public:
    using ConfigError::ConfigError;
};

//! Stream violates an encoding invariant.
class EncodeError : public Error
{
  public:
    using Error::Error;
};

//! Malformed binary input. Carries the byte offset of the failure.
class ParseError : public Error
{
  public:
    ParseError(std::size_t offset, std::string const& what)
        : Error("offset " + std::to_string(offset) + ": " + what)
        , offset_(offset)
    {
    }

    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

//! Malformed text input (configuration, CSV). Carries file and line.
class SyntaxError : public Error
{
  public:
    SyntaxError(std::string const& file, int line, std::string const& what)
        : Error(file + ":" + std::to_string(line) + ": " + what)
        , file_(file)
        , line_(line)
    {
    }

    std::string const& file() const noexcept { return file_; }
    int line() const noexcept { return line_; }

  private:
    std::string file_;
    int line_;
};

//! No statistically significant signal where one is required.
class DetectionError : public Error
{
  public:
    using Error::Error;
};

//! Background could not be estimated (e.g. empty sidebands).
class EstimationError : public Error
{
  public:
    using Error::Error;
};

//! Filesystem failure.
class IoError : public Error
{
  public:
    using Error::Error;
};

//! Nonlinear fit did not converge; carries the last residuals.
class FitError : public Error
{
  public:
    FitError(std::string const& what, std::vector<double> residuals = {})
        : Error(what), residuals_(std::move(residuals))
    {
    }

    std::vector<double> const& residuals() const noexcept { return residuals_; }

  private:
    std::vector<double> residuals_;
};
}  // namespace epair
