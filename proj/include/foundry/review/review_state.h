#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "foundry/dataset/sampling.h"

namespace foundry::review {

enum class ItemKind { caption, question, answer };
enum class Decision { accept, reject, edit };
enum class RejectPolicy { regenerate, remove };

std::string_view to_string(ItemKind k);
std::string_view to_string(Decision d);
std::string_view to_string(RejectPolicy p);
ItemKind parse_item_kind(std::string_view s);
Decision parse_decision(std::string_view s);
RejectPolicy parse_reject_policy(std::string_view s);

/// Item ids: "<image_id>:caption", "<question_id>", "<question_id>:a<k>".
struct ItemRef {
  ItemKind kind = ItemKind::caption;
  std::string image_id;
  std::string question_id;
  int answer_id = 0;
};

struct ReviewVerdict {
  std::string item_id;
  ItemKind item_kind = ItemKind::caption;
  Decision decision = Decision::accept;
  std::optional<std::string> edited_text;
  std::string reviewer_id;
  std::string timestamp;

  friend bool operator==(const ReviewVerdict&, const ReviewVerdict&) = default;
};

struct ReviewSessionStats {
  std::size_t total = 0;
  std::size_t reviewed = 0;
  std::size_t pending = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t edited = 0;
  double error_rate = 0.0;   // (rejected + edited) / reviewed
  double reject_rate = 0.0;
  double edit_rate = 0.0;
  double confidence = 0.95;
  double margin_at_confidence = 0.0;
  bool closed = false;

  friend bool operator==(const ReviewSessionStats&, const ReviewSessionStats&) = default;
};

struct RegenerationEntry {
  std::string item_id;
  ItemKind item_kind = ItemKind::caption;
  RejectPolicy action = RejectPolicy::regenerate;
  std::string session_id;

  friend bool operator==(const RegenerationEntry&, const RegenerationEntry&) = default;
};

/// One line of the append-only review log.
struct LogEntry {
  enum class Type { session_started, verdict, session_closed } type = Type::verdict;
  std::string session_id;
  std::optional<dataset::ReviewSample> sample;  // session_started
  std::optional<ReviewVerdict> verdict;         // verdict
  RejectPolicy policy = RejectPolicy::regenerate;  // session_started

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

nlohmann::json to_json(const ReviewVerdict& v);
ReviewVerdict verdict_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ReviewSessionStats& s);
nlohmann::json to_json(const RegenerationEntry& e);
nlohmann::json to_json(const LogEntry& e);
LogEntry log_entry_from_json(const nlohmann::json& j);

/// Fold of the review log. apply() validates before mutating, so a throwing
/// entry leaves the state untouched.
class ReviewState {
 public:
  struct Session {
    dataset::ReviewSample sample;
    RejectPolicy policy = RejectPolicy::regenerate;
    std::map<std::string, ReviewVerdict> verdicts;
    bool closed = false;
  };

  /// Throws UnknownSession, AlreadyReviewed, SessionClosed, UnknownItems
  /// (item not in the session) or InvalidArgument (edit without text, or
  /// text on a non-edit verdict).
  void apply(const LogEntry& entry);

  static ReviewState replay(const std::vector<LogEntry>& log);

  bool has_session(const std::string& id) const { return sessions_.count(id) > 0; }
  const Session& session(const std::string& id) const;
  const std::map<std::string, Session>& sessions() const { return sessions_; }
  std::vector<std::string> pending(const std::string& id) const;
  ReviewSessionStats stats(const std::string& id) const;
  const std::vector<RegenerationEntry>& regeneration_queue() const { return queue_; }

 private:
  std::map<std::string, Session> sessions_;
  std::vector<RegenerationEntry> queue_;
  std::set<std::string> queued_items_;
};

}  // namespace foundry::review
