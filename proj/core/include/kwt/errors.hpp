#pragma once

#include <stdexcept>
#include <string>

namespace kwt {

// Base class for every error raised by the toolkit. Subclasses distinguish
// failure modes that callers are expected to handle differently.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file content. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line = 0)
      : Error(line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Network-level failure that survived the retry budget.
class TransportError : public Error {
 public:
  TransportError(const std::string& msg, std::string attempt_log = {})
      : Error(msg), attempt_log_(std::move(attempt_log)) {}
  const std::string& attempt_log() const { return attempt_log_; }

 private:
  std::string attempt_log_;
};

// Non-retriable HTTP failure (4xx other than 429). Carries a body excerpt.
class RequestError : public Error {
 public:
  RequestError(const std::string& msg, int status, std::string body_excerpt = {})
      : Error(msg), status_(status), body_excerpt_(std::move(body_excerpt)) {}
  int status() const { return status_; }
  const std::string& body_excerpt() const { return body_excerpt_; }

 private:
  int status_;
  std::string body_excerpt_;
};

// Judge endpoint answered, but not with a yes/no verdict.
class JudgeProtocolError : public Error {
 public:
  JudgeProtocolError(const std::string& msg, std::string raw_reply)
      : Error(msg + ": \"" + raw_reply + "\""), raw_reply_(std::move(raw_reply)) {}
  const std::string& raw_reply() const { return raw_reply_; }

 private:
  std::string raw_reply_;
};

// A metric whose denominator is empty for the given counts (e.g. the model
// never abstained). Never silently mapped to 0 or 100.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Base-side probability mass with no trained-side mass to compare against.
class InfiniteDivergenceError : public Error {
 public:
  InfiniteDivergenceError(const std::string& instance_id, std::size_t position,
                          const std::string& token)
      : Error("infinite KL divergence for instance '" + instance_id +
              "' at position " + std::to_string(position) + ", token '" +
              token + "'"),
        instance_id_(instance_id),
        position_(position),
        token_(token) {}
  const std::string& instance_id() const { return instance_id_; }
  std::size_t position() const { return position_; }
  const std::string& token() const { return token_; }

 private:
  std::string instance_id_;
  std::size_t position_;
  std::string token_;
};

}  // namespace kwt
