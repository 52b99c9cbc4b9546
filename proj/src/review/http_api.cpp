#include "foundry/review/http_api.h"

#include <httplib.h>

#include "foundry/core/serialize.h"
#include "foundry/providers/http_provider.h"

namespace foundry::review {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status_for(code), {{"error", std::string(to_string(code))}, {"message", message}});
}

template <class F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::invalid_argument, std::string("bad JSON: ") + e.what());
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", "Internal"}, {"message", e.what()}});
    }
  };
}

json parse_body(const httplib::Request& req) {
  auto body = json::parse(req.body.empty() ? "{}" : req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) throw Error(ErrorCode::invalid_argument, "request body must be a JSON object");
  return body;
}

dataset::ReviewSample sample_from_request(const json& body) {
  if (body.contains("sample")) return dataset::review_sample_from_json(body["sample"]);
  if (body.contains("sample_path"))
    return dataset::review_sample_from_json(read_json_file(body["sample_path"].get<std::string>()));
  if (body.contains("item_ids")) {
    dataset::ReviewSample s;
    s.item_ids = body["item_ids"].get<std::vector<std::string>>();
    s.population_size = s.item_ids.size();
    s.sample_size = s.item_ids.size();
    return s;
  }
  throw Error(ErrorCode::invalid_argument, "POST /sessions needs 'sample', 'sample_path' or 'item_ids'");
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::unknown_session: return 404;
    case ErrorCode::unknown_items: return 404;
    case ErrorCode::already_reviewed: return 409;
    case ErrorCode::session_closed: return 410;
    case ErrorCode::invalid_argument:
    case ErrorCode::schema_parse_failure:
    case ErrorCode::config_invalid: return 400;
    default: return 500;
  }
}

void install_routes(httplib::Server& server, ReviewService& service) {
  server.Post("/sessions", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto sample = sample_from_request(parse_body(req));
                const auto id = service.start_session(sample);
                send_json(res, 201, {{"session_id", id}, {"stats", to_json(service.stats(id))}});
              }));

  server.Get(R"(/sessions/([^/]+)/batch)", guarded([&](const httplib::Request& req, httplib::Response& res) {
               std::size_t n = 10;
               if (req.has_param("n")) {
                 const auto v = req.get_param_value("n");
                 if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
                   throw Error(ErrorCode::invalid_argument, "n must be a non-negative integer");
                 n = std::stoul(v);
               }
               send_json(res, 200, {{"items", service.get_batch(req.matches[1], n)}});
             }));

  server.Post(R"(/sessions/([^/]+)/verdicts)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const auto verdict = verdict_from_json(parse_body(req));
                send_json(res, 200, to_json(service.post_verdict(req.matches[1], verdict)));
              }));

  server.Get(R"(/sessions/([^/]+)/stats)", guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, to_json(service.stats(req.matches[1])));
             }));

  server.Post(R"(/sessions/([^/]+)/close)", guarded([&](const httplib::Request& req, httplib::Response& res) {
                service.close_session(req.matches[1]);
                send_json(res, 200, to_json(service.stats(req.matches[1])));
              }));

  server.Get("/regeneration-queue", guarded([&](const httplib::Request&, httplib::Response& res) {
               json out = json::array();
               for (const auto& e : service.regeneration_queue()) out.push_back(to_json(e));
               send_json(res, 200, {{"items", out}});
             }));

  server.Get(R"(/items/([^/]+)/image)", guarded([&](const httplib::Request& req, httplib::Response& res) {
               const auto path = service.image_path(req.matches[1]);
               if (!std::filesystem::exists(path))
                 throw Error(ErrorCode::io_error, "image file missing: " + path.string());
               res.status = 200;
               res.set_content(read_text_file(path), providers::image_mime_type(path.string()));
             }));
}

}  // namespace foundry::review
