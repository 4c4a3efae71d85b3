#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace frechet {

// Base of every error raised by the library. Each subclass names one failure
// class so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what), detail_(what) {}
  Error(const std::string& what, std::string detail) : std::runtime_error(what), detail_(std::move(detail)) {}
  /// Message without the error-class prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
};

#define FRECHET_DECLARE_ERROR(Name)            \
  class Name : public Error {                  \
   public:                                     \
    explicit Name(const std::string& what)     \
        : Error(std::string(#Name ": ") + what, what) {} \
  }

FRECHET_DECLARE_ERROR(DimensionError);
FRECHET_DECLARE_ERROR(NotPositiveDefinite);
FRECHET_DECLARE_ERROR(NotSymmetric);
FRECHET_DECLARE_ERROR(NotMonotone);
FRECHET_DECLARE_ERROR(EmptyInput);
FRECHET_DECLARE_ERROR(IllPosedObjective);
FRECHET_DECLARE_ERROR(SpecMismatch);
FRECHET_DECLARE_ERROR(DegenerateSigma);
FRECHET_DECLARE_ERROR(BadData);
FRECHET_DECLARE_ERROR(BadObjective);
FRECHET_DECLARE_ERROR(FitFailed);
FRECHET_DECLARE_ERROR(InfeasibleSpec);
FRECHET_DECLARE_ERROR(ConfigError);
FRECHET_DECLARE_ERROR(ValidationError);
FRECHET_DECLARE_ERROR(DataError);

#undef FRECHET_DECLARE_ERROR

}  // namespace frechet
