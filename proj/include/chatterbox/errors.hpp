#pragma once

#include <stdexcept>
#include <string>

namespace chatterbox {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CHATTERBOX_DEFINE_ERROR(Name)   \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  };

CHATTERBOX_DEFINE_ERROR(ConfigError)
CHATTERBOX_DEFINE_ERROR(QuotaExhausted)
CHATTERBOX_DEFINE_ERROR(ValidationExhausted)
CHATTERBOX_DEFINE_ERROR(BackendUnavailable)
CHATTERBOX_DEFINE_ERROR(CapabilityViolation)
CHATTERBOX_DEFINE_ERROR(DeliveryError)
CHATTERBOX_DEFINE_ERROR(AuthExpired)
CHATTERBOX_DEFINE_ERROR(PoolMiss)
CHATTERBOX_DEFINE_ERROR(StateError)
CHATTERBOX_DEFINE_ERROR(SerializationError)
CHATTERBOX_DEFINE_ERROR(Conflict)
CHATTERBOX_DEFINE_ERROR(NotFound)
CHATTERBOX_DEFINE_ERROR(CaptionUnavailable)
CHATTERBOX_DEFINE_ERROR(EmptyCorpus)
CHATTERBOX_DEFINE_ERROR(ClassifierError)

#undef CHATTERBOX_DEFINE_ERROR

/// Malformed document. `field()` is the dotted path of the offending field.
class ParseError : public Error {
 public:
  explicit ParseError(std::string field, const std::string& detail = {})
      : Error(detail.empty() ? field : field + ": " + detail), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A scenario expectation failed. `step()` is the 0-based step index.
class ScenarioFailure : public Error {
 public:
  ScenarioFailure(std::size_t step, std::string label, const std::string& detail)
      : Error("step " + std::to_string(step) + (label.empty() ? "" : " (" + label + ")") + ": " +
              detail),
        step_(step),
        label_(std::move(label)) {}

  std::size_t step() const noexcept { return step_; }
  const std::string& label() const noexcept { return label_; }

 private:
  std::size_t step_;
  std::string label_;
};

}  // namespace chatterbox
