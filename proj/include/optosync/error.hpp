#pragma once

#include <stdexcept>
#include <string>

namespace optosync {

/// Base class for every error raised by the library. `kind()` is a short
/// stable tag that ends up in CSV status columns and CLI diagnostics.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

class InvalidParams : public Error {
public:
  explicit InvalidParams(const std::string& what) : Error("InvalidParams", what) {}
};

/// A state entry became NaN or infinite during integration.
class NonFinite : public Error {
public:
  explicit NonFinite(double t)
      : Error("NonFinite", "non-finite state at t = " + std::to_string(t)), time_(t) {}

  double time() const noexcept { return time_; }

private:
  double time_;
};

class DegeneratePhase : public Error {
public:
  explicit DegeneratePhase(const std::string& what) : Error("DegeneratePhase", what) {}
};

class NonPositiveDenominator : public Error {
public:
  explicit NonPositiveDenominator(double value)
      : Error("NonPositiveDenominator",
              "measure denominator is not positive: " + std::to_string(value)),
        value_(value) {}

  double value() const noexcept { return value_; }

private:
  double value_;
};

class EmptyWindow : public Error {
public:
  explicit EmptyWindow(const std::string& what) : Error("EmptyWindow", what) {}
};

class TooShort : public Error {
public:
  explicit TooShort(const std::string& what) : Error("TooShort", what) {}
};

class UnknownRecipe : public Error {
public:
  explicit UnknownRecipe(const std::string& name)
      : Error("UnknownRecipe", "unknown figure recipe: " + name) {}
};

class ConfigParse : public Error {
public:
  ConfigParse(const std::string& what, int line = 0)
      : Error("ConfigParse", line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  int line() const noexcept { return line_; }

private:
  int line_;
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error("Io", what) {}
};

}  // namespace optosync
