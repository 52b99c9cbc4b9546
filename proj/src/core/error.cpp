#include "foundry/core/error.h"

namespace foundry {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::config_invalid: return "ConfigInvalid";
    case ErrorCode::unknown_command: return "UnknownCommand";
    case ErrorCode::credential_missing: return "CredentialMissing";
    case ErrorCode::transport_error: return "TransportError";
    case ErrorCode::transport_exhausted: return "TransportExhausted";
    case ErrorCode::malformed_response: return "MalformedResponse";
    case ErrorCode::empty_pool: return "EmptyPool";
    case ErrorCode::empty_completion: return "EmptyCompletion";
    case ErrorCode::schema_parse_failure: return "SchemaParseFailure";
    case ErrorCode::short_batch: return "ShortBatch";
    case ErrorCode::stage_exhausted: return "StageExhausted";
    case ErrorCode::incomplete_record: return "IncompleteRecord";
    case ErrorCode::corpus_too_small: return "CorpusTooSmall";
    case ErrorCode::unparsable_judgment: return "UnparsableJudgment";
    case ErrorCode::id_mismatch: return "IdMismatch";
    case ErrorCode::backend_unreachable: return "BackendUnreachable";
    case ErrorCode::shutdown: return "Shutdown";
    case ErrorCode::unknown_items: return "UnknownItems";
    case ErrorCode::unknown_session: return "UnknownSession";
    case ErrorCode::already_reviewed: return "AlreadyReviewed";
    case ErrorCode::session_closed: return "SessionClosed";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

}  // namespace foundry
