#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "foundry/core/types.h"
#include "foundry/review/review_state.h"

namespace foundry::review {

struct ReviewConfig {
  RejectPolicy reject_policy = RejectPolicy::regenerate;
  std::optional<std::filesystem::path> log_path;     // append-only JSON lines; replayed on start
  std::optional<std::filesystem::path> records_dir;  // edited records are saved here
};

/// Parses an item id against the record set. nullopt when it names nothing.
std::optional<ItemRef> resolve_item(const std::string& item_id, const std::map<std::string, ImageRecord>& records);

/// Every reviewable item id of the records: captions, questions, answers.
std::vector<std::string> reviewable_item_ids(const std::vector<ImageRecord>& records);

/// Holds the records and the review state. Writes are serialized by one
/// exclusive lock; reads take a shared lock.
class ReviewService {
 public:
  ReviewService(std::vector<ImageRecord> records, ReviewConfig config);

  /// Throws UnknownItems listing every id not found in the records.
  std::string start_session(const dataset::ReviewSample& sample);
  void close_session(const std::string& session_id);

  /// Up to n pending items in sample order, each with its review context.
  nlohmann::json get_batch(const std::string& session_id, std::size_t n) const;

  /// Persists the verdict, applies edits to the record, returns fresh stats.
  ReviewSessionStats post_verdict(const std::string& session_id, ReviewVerdict verdict);

  ReviewSessionStats stats(const std::string& session_id) const;
  std::vector<RegenerationEntry> regeneration_queue() const;
  std::vector<LogEntry> log() const;
  std::vector<ImageRecord> records() const;

  /// Image file backing an item (UnknownItems when the id is unknown).
  std::filesystem::path image_path(const std::string& item_id) const;

 private:
  void append(const LogEntry& entry);
  void apply_edit(const ItemRef& ref, const ReviewVerdict& verdict);
  nlohmann::json describe(const std::string& item_id) const;
  void write_snapshot() const;

  ReviewConfig config_;
  std::map<std::string, ImageRecord> records_;
  ReviewState state_;
  std::vector<LogEntry> log_;
  std::size_t next_session_ = 1;
  mutable std::shared_mutex mu_;
};

}  // namespace foundry::review
