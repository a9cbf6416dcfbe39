#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace berryline {

// Base of every library error. `index` is the offending path/loop sample when
// the failure is tied to one.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), index_(index) {}

  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  std::optional<std::size_t> index_;
};

#define BERRYLINE_ERROR(Name)   \
  class Name : public Error {   \
   public:                      \
    using Error::Error;         \
  };

BERRYLINE_ERROR(DegenerateSpectrum)
BERRYLINE_ERROR(DefectiveMatrix)
BERRYLINE_ERROR(PathTooCoarse)
BERRYLINE_ERROR(BandExchange)
BERRYLINE_ERROR(NonFiniteInput)
BERRYLINE_ERROR(SingularParameters)
BERRYLINE_ERROR(TrueCrossing)
BERRYLINE_ERROR(BadResolution)
BERRYLINE_ERROR(SingularLoop)
BERRYLINE_ERROR(Disagreement)
BERRYLINE_ERROR(GaugeMismatch)
BERRYLINE_ERROR(DomainError)
BERRYLINE_ERROR(OutsideValidityDomain)
BERRYLINE_ERROR(UndefinedAtTransition)
BERRYLINE_ERROR(ClassificationMismatch)
BERRYLINE_ERROR(StepTooLarge)
BERRYLINE_ERROR(BandLeakage)
BERRYLINE_ERROR(InvalidArgument)

#undef BERRYLINE_ERROR

// Dyadic refinement ran out of resolution. Carries the (N, value) history.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, std::vector<std::pair<std::size_t, double>> history)
      : Error(what), history_(std::move(history)) {}

  const std::vector<std::pair<std::size_t, double>>& history() const noexcept { return history_; }

 private:
  std::vector<std::pair<std::size_t, double>> history_;
};

}  // namespace berryline
