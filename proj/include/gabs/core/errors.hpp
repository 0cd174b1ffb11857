#ifndef GABS_CORE_ERRORS_HPP
#define GABS_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gabs {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Generic malformed-input error (files, CLI arguments, bad preconditions).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// --- distribution / ledger -------------------------------------------------

class NegativeEntryError : public Error {
 public:
  using Error::Error;
};

class NotNormalizedError : public Error {
 public:
  explicit NotNormalizedError(double sum)
      : Error("distribution does not sum to 1 (sum=" + std::to_string(sum) + ")"), sum_(sum) {}
  double sum() const { return sum_; }

 private:
  double sum_;
};

class LengthMismatchError : public Error {
 public:
  using Error::Error;
};

class EmptyLedgerError : public Error {
 public:
  using Error::Error;
};

// --- model -------------------------------------------------------------------

class PrefixTooLongError : public Error {
 public:
  using Error::Error;
};

class InvalidSpecError : public Error {
 public:
  using Error::Error;
};

// --- scoring -----------------------------------------------------------------

class NonPositiveZError : public Error {
 public:
  using Error::Error;
};

class UnfinishedError : public Error {
 public:
  using Error::Error;
};

class ZeroLengthError : public Error {
 public:
  using Error::Error;
};

class WrongInputShapeError : public Error {
 public:
  using Error::Error;
};

// --- search ------------------------------------------------------------------

class NoHypothesisError : public Error {
 public:
  using Error::Error;
};

class SearchSpaceTooLargeError : public Error {
 public:
  using Error::Error;
};

class InvalidScheduleError : public Error {
 public:
  using Error::Error;
};

// --- predictor ---------------------------------------------------------------

class MissingFeaturesError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatchError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

// --- evaluation --------------------------------------------------------------

class EmptyReferenceError : public Error {
 public:
  using Error::Error;
};

class EmptyHypothesisError : public Error {
 public:
  using Error::Error;
};

class EmptySetError : public Error {
 public:
  using Error::Error;
};

}  // namespace gabs

#endif  // GABS_CORE_ERRORS_HPP
