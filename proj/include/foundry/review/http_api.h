#pragma once

#include <string>

#include "foundry/core/error.h"
#include "foundry/review/review_service.h"

namespace httplib {
class Server;
}

namespace foundry::review {

/// HTTP status used for each error code in JSON error bodies
/// {"error": "<Code>", "message": "..."}.
int http_status_for(ErrorCode code);

/// Routes:
///   POST /sessions                     {"sample": {...}} | {"sample_path": "..."} | {"item_ids": [...]}
///   GET  /sessions/{id}/batch?n=
///   POST /sessions/{id}/verdicts       ReviewVerdict
///   GET  /sessions/{id}/stats
///   POST /sessions/{id}/close
///   GET  /regeneration-queue
///   GET  /items/{id}/image
void install_routes(httplib::Server& server, ReviewService& service);

}  // namespace foundry::review
