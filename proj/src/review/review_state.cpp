#include "foundry/review/review_state.h"

#include <algorithm>
#include <cmath>

#include "foundry/core/error.h"

namespace foundry::review {

std::string_view to_string(ItemKind k) {
  switch (k) {
    case ItemKind::caption: return "caption";
    case ItemKind::question: return "question";
    case ItemKind::answer: return "answer";
  }
  return "caption";
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::accept: return "accept";
    case Decision::reject: return "reject";
    case Decision::edit: return "edit";
  }
  return "accept";
}

std::string_view to_string(RejectPolicy p) { return p == RejectPolicy::remove ? "remove" : "regenerate"; }

ItemKind parse_item_kind(std::string_view s) {
  if (s == "caption") return ItemKind::caption;
  if (s == "question") return ItemKind::question;
  if (s == "answer") return ItemKind::answer;
  throw Error(ErrorCode::invalid_argument, "unknown item kind '" + std::string(s) + "'");
}

Decision parse_decision(std::string_view s) {
  if (s == "accept") return Decision::accept;
  if (s == "reject") return Decision::reject;
  if (s == "edit") return Decision::edit;
  throw Error(ErrorCode::invalid_argument, "unknown decision '" + std::string(s) + "'");
}

RejectPolicy parse_reject_policy(std::string_view s) {
  if (s == "regenerate") return RejectPolicy::regenerate;
  if (s == "remove") return RejectPolicy::remove;
  throw Error(ErrorCode::config_invalid, "unknown reject policy '" + std::string(s) + "'");
}

nlohmann::json to_json(const ReviewVerdict& v) {
  nlohmann::json j{{"item_id", v.item_id},         {"item_kind", to_string(v.item_kind)},
                   {"decision", to_string(v.decision)}, {"reviewer_id", v.reviewer_id},
                   {"timestamp", v.timestamp}};
  if (v.edited_text) j["edited_text"] = *v.edited_text;
  return j;
}

ReviewVerdict verdict_from_json(const nlohmann::json& j) {
  try {
    ReviewVerdict v;
    v.item_id = j.at("item_id").get<std::string>();
    v.item_kind = parse_item_kind(j.at("item_kind").get<std::string>());
    v.decision = parse_decision(j.at("decision").get<std::string>());
    if (j.contains("edited_text") && !j["edited_text"].is_null()) v.edited_text = j["edited_text"].get<std::string>();
    v.reviewer_id = j.value("reviewer_id", "");
    v.timestamp = j.value("timestamp", "");
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_argument, std::string("bad verdict: ") + e.what());
  }
}

nlohmann::json to_json(const ReviewSessionStats& s) {
  return {{"total", s.total},
          {"reviewed", s.reviewed},
          {"pending", s.pending},
          {"accepted", s.accepted},
          {"rejected", s.rejected},
          {"edited", s.edited},
          {"error_rate", s.error_rate},
          {"reject_rate", s.reject_rate},
          {"edit_rate", s.edit_rate},
          {"confidence", s.confidence},
          {"margin_at_confidence", s.margin_at_confidence},
          {"closed", s.closed}};
}

nlohmann::json to_json(const RegenerationEntry& e) {
  return {{"item_id", e.item_id},
          {"item_kind", to_string(e.item_kind)},
          {"action", to_string(e.action)},
          {"session_id", e.session_id}};
}

nlohmann::json to_json(const LogEntry& e) {
  nlohmann::json j{{"session_id", e.session_id}};
  switch (e.type) {
    case LogEntry::Type::session_started:
      j["type"] = "session_started";
      j["sample"] = dataset::to_json(*e.sample);
      j["policy"] = to_string(e.policy);
      break;
    case LogEntry::Type::verdict:
      j["type"] = "verdict";
      j["verdict"] = to_json(*e.verdict);
      break;
    case LogEntry::Type::session_closed: j["type"] = "session_closed"; break;
  }
  return j;
}

LogEntry log_entry_from_json(const nlohmann::json& j) {
  LogEntry e;
  const std::string type = j.at("type").get<std::string>();
  e.session_id = j.at("session_id").get<std::string>();
  if (type == "session_started") {
    e.type = LogEntry::Type::session_started;
    e.sample = dataset::review_sample_from_json(j.at("sample"));
    e.policy = parse_reject_policy(j.value("policy", "regenerate"));
  } else if (type == "verdict") {
    e.type = LogEntry::Type::verdict;
    e.verdict = verdict_from_json(j.at("verdict"));
  } else if (type == "session_closed") {
    e.type = LogEntry::Type::session_closed;
  } else {
    throw Error(ErrorCode::schema_parse_failure, "unknown review log entry type '" + type + "'");
  }
  return e;
}

const ReviewState::Session& ReviewState::session(const std::string& id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::unknown_session, "no review session '" + id + "'");
  return it->second;
}

void ReviewState::apply(const LogEntry& entry) {
  switch (entry.type) {
    case LogEntry::Type::session_started: {
      if (sessions_.count(entry.session_id))
        throw Error(ErrorCode::invalid_argument, "session '" + entry.session_id + "' already exists");
      if (!entry.sample) throw Error(ErrorCode::invalid_argument, "session start without a sample");
      sessions_[entry.session_id] = Session{*entry.sample, entry.policy, {}, false};
      return;
    }
    case LogEntry::Type::session_closed: {
      session(entry.session_id);
      sessions_[entry.session_id].closed = true;
      return;
    }
    case LogEntry::Type::verdict: break;
  }

  const auto& s = session(entry.session_id);
  if (!entry.verdict) throw Error(ErrorCode::invalid_argument, "verdict entry without a verdict");
  const ReviewVerdict& v = *entry.verdict;
  if (s.closed) throw Error(ErrorCode::session_closed, "session '" + entry.session_id + "' is closed");
  if (std::find(s.sample.item_ids.begin(), s.sample.item_ids.end(), v.item_id) == s.sample.item_ids.end())
    throw Error(ErrorCode::unknown_items, "item '" + v.item_id + "' is not in session '" + entry.session_id + "'");
  if (s.verdicts.count(v.item_id))
    throw Error(ErrorCode::already_reviewed, "item '" + v.item_id + "' already reviewed");
  if ((v.decision == Decision::edit) != v.edited_text.has_value())
    throw Error(ErrorCode::invalid_argument, "edited_text is required for edit verdicts and only for them");

  auto& target = sessions_[entry.session_id];
  target.verdicts[v.item_id] = v;
  if (v.decision == Decision::reject && queued_items_.insert(v.item_id).second)
    queue_.push_back({v.item_id, v.item_kind, target.policy, entry.session_id});
}

ReviewState ReviewState::replay(const std::vector<LogEntry>& log) {
  ReviewState state;
  for (const auto& e : log) state.apply(e);
  return state;
}

std::vector<std::string> ReviewState::pending(const std::string& id) const {
  const auto& s = session(id);
  std::vector<std::string> out;
  for (const auto& item : s.sample.item_ids)
    if (!s.verdicts.count(item)) out.push_back(item);
  return out;
}

ReviewSessionStats ReviewState::stats(const std::string& id) const {
  const auto& s = session(id);
  ReviewSessionStats st;
  st.total = s.sample.item_ids.size();
  st.reviewed = s.verdicts.size();
  st.pending = st.total - st.reviewed;
  st.closed = s.closed;
  st.confidence = s.sample.confidence;
  for (const auto& [_, v] : s.verdicts) {
    switch (v.decision) {
      case Decision::accept: ++st.accepted; break;
      case Decision::reject: ++st.rejected; break;
      case Decision::edit: ++st.edited; break;
    }
  }
  if (st.reviewed == 0) {
    st.margin_at_confidence = s.sample.margin;
    return st;
  }
  const double n = static_cast<double>(st.reviewed);
  st.error_rate = static_cast<double>(st.rejected + st.edited) / n;
  st.reject_rate = static_cast<double>(st.rejected) / n;
  st.edit_rate = static_cast<double>(st.edited) / n;

  const double big_n = static_cast<double>(s.sample.population_size);
  const double fpc = big_n > 1.0 && n < big_n ? std::sqrt((big_n - n) / (big_n - 1.0)) : (big_n > 1.0 ? 0.0 : 1.0);
  st.margin_at_confidence =
      dataset::z_for_confidence(s.sample.confidence) * std::sqrt(st.error_rate * (1.0 - st.error_rate) / n) * fpc;
  return st;
}

}  // namespace foundry::review
