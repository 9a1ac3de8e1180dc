#pragma once

#include <stdexcept>
#include <string>

namespace clozefix {

// Root of every error the engine raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MaskStillPresent : public Error {
 public:
  MaskStillPresent() : Error("mask sentinel still present in token sequence") {}
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("training corpus is empty") {}
};

class CoreTooLarge : public Error {
 public:
  CoreTooLarge(std::size_t core, std::size_t budget)
      : Error("comment-wrapped buggy line plus mask line needs " + std::to_string(core) +
              " tokens, budget is " + std::to_string(budget)),
        core_tokens(core),
        budget_tokens(budget) {}

  std::size_t core_tokens;
  std::size_t budget_tokens;
};

class EmptyVocabulary : public Error {
 public:
  EmptyVocabulary() : Error("predictor has no vocabulary (untrained)") {}
};

class InvalidQuery : public Error {
 public:
  using Error::Error;
};

class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

// The remote backend answered, but with a protocol error payload.
class RemoteError : public Error {
 public:
  RemoteError(std::string code, const std::string& message)
      : Error("remote predictor error [" + code + "]: " + message), code(std::move(code)) {}

  std::string code;
};

class StoreCorrupt : public Error {
 public:
  using Error::Error;
};

class SandboxSetupFailed : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace clozefix
