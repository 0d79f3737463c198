#pragma once

#include <stdexcept>
#include <string>

namespace cpr {

enum class ErrorCode {
  usage = 1,
  io,
  transport,
  protocol,
  auth,
  judge_parse,
  empty_input,
  non_finite,
  insufficient_corpus,
  missing_score,
  partial_failure,
  invalid_config,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

struct TransportError : Error {
  explicit TransportError(std::string m) : Error(ErrorCode::transport, std::move(m)) {}
};
struct ProtocolError : Error {
  explicit ProtocolError(std::string m) : Error(ErrorCode::protocol, std::move(m)) {}
};
struct AuthError : Error {
  explicit AuthError(std::string m) : Error(ErrorCode::auth, std::move(m)) {}
};
struct JudgeParseError : Error {
  explicit JudgeParseError(std::string m) : Error(ErrorCode::judge_parse, std::move(m)) {}
};
struct EmptyInputError : Error {
  explicit EmptyInputError(std::string m) : Error(ErrorCode::empty_input, std::move(m)) {}
};
struct NonFiniteError : Error {
  explicit NonFiniteError(std::string m) : Error(ErrorCode::non_finite, std::move(m)) {}
};
struct InsufficientCorpusError : Error {
  explicit InsufficientCorpusError(std::string m)
      : Error(ErrorCode::insufficient_corpus, std::move(m)) {}
};
struct MissingScoreError : Error {
  explicit MissingScoreError(std::string m) : Error(ErrorCode::missing_score, std::move(m)) {}
};
struct InvalidConfigError : Error {
  explicit InvalidConfigError(std::string m) : Error(ErrorCode::invalid_config, std::move(m)) {}
};

}  // namespace cpr
