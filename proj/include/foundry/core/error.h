#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace foundry {

/// Failure categories surfaced across module boundaries. The CLI prints the
/// name verbatim in its machine-readable error line.
enum class ErrorCode {
  config_invalid,
  unknown_command,
  credential_missing,
  transport_error,
  transport_exhausted,
  malformed_response,
  empty_pool,
  empty_completion,
  schema_parse_failure,
  short_batch,
  stage_exhausted,
  incomplete_record,
  corpus_too_small,
  unparsable_judgment,
  id_mismatch,
  backend_unreachable,
  shutdown,
  unknown_items,
  unknown_session,
  already_reviewed,
  session_closed,
  invalid_argument,
  io_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Transport failures carry a class so retry policies can filter them.
enum class TransportErrorClass { connection, timeout, server_error, rate_limited, client_error };

class TransportError : public Error {
 public:
  TransportError(TransportErrorClass cls, const std::string& message)
      : Error(ErrorCode::transport_error, message), class_(cls) {}

  TransportErrorClass error_class() const noexcept { return class_; }

 private:
  TransportErrorClass class_;
};

}  // namespace foundry
