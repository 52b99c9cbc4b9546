#include "foundry/review/review_service.h"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <mutex>

#include "foundry/core/error.h"
#include "foundry/core/serialize.h"
#include "foundry/core/text.h"

namespace foundry::review {
namespace {

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const QaItem* find_question(const ImageRecord& r, const std::string& qid) {
  for (const auto& q : r.qa_items)
    if (q.question_id == qid) return &q;
  return nullptr;
}

}  // namespace

std::optional<ItemRef> resolve_item(const std::string& item_id, const std::map<std::string, ImageRecord>& records) {
  if (ends_with(item_id, ":caption")) {
    const std::string image = item_id.substr(0, item_id.size() - 8);
    auto it = records.find(image);
    if (it == records.end() || !it->second.caption) return std::nullopt;
    return ItemRef{ItemKind::caption, image, "", 0};
  }

  std::string qid = item_id;
  int answer_id = 0;
  if (auto pos = item_id.rfind(":a"); pos != std::string::npos && pos + 2 < item_id.size()) {
    const std::string digits = item_id.substr(pos + 2);
    if (digits.find_first_not_of("0123456789") == std::string::npos && digits.size() < 6) {
      qid = item_id.substr(0, pos);
      answer_id = std::stoi(digits);
    }
  }
  for (const auto& [image_id, record] : records) {
    const QaItem* q = find_question(record, qid);
    if (!q) continue;
    if (answer_id == 0) return ItemRef{ItemKind::question, image_id, qid, 0};
    for (const auto& a : q->answers)
      if (a.answer_id == answer_id) return ItemRef{ItemKind::answer, image_id, qid, answer_id};
    return std::nullopt;
  }
  return std::nullopt;
}

std::vector<std::string> reviewable_item_ids(const std::vector<ImageRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) {
    if (r.caption) out.push_back(r.image_id + ":caption");
    for (const auto& q : r.qa_items) {
      out.push_back(q.question_id);
      for (const auto& a : q.answers) out.push_back(q.question_id + ":a" + std::to_string(a.answer_id));
    }
  }
  return out;
}

ReviewService::ReviewService(std::vector<ImageRecord> records, ReviewConfig config) : config_(std::move(config)) {
  for (auto& r : records) {
    auto id = r.image_id;
    records_.emplace(std::move(id), std::move(r));
  }
  if (config_.log_path && std::filesystem::exists(*config_.log_path)) {
    std::ifstream in(*config_.log_path);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      const LogEntry entry = log_entry_from_json(nlohmann::json::parse(line));
      state_.apply(entry);
      if (entry.type == LogEntry::Type::session_started) ++next_session_;
      if (entry.verdict && entry.verdict->decision == Decision::edit) {
        if (auto ref = resolve_item(entry.verdict->item_id, records_)) apply_edit(*ref, *entry.verdict);
      }
      log_.push_back(entry);
    }
  }
}

void ReviewService::append(const LogEntry& entry) {
  state_.apply(entry);
  log_.push_back(entry);
  if (config_.log_path) {
    if (config_.log_path->has_parent_path()) std::filesystem::create_directories(config_.log_path->parent_path());
    std::ofstream out(*config_.log_path, std::ios::app);
    out << to_json(entry).dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::io_error, "cannot append to " + config_.log_path->string());
    write_snapshot();
  }
}

void ReviewService::write_snapshot() const {
  nlohmann::json sessions = nlohmann::json::object();
  for (const auto& [id, _] : state_.sessions()) sessions[id] = to_json(state_.stats(id));
  nlohmann::json queue = nlohmann::json::array();
  for (const auto& e : state_.regeneration_queue()) queue.push_back(to_json(e));
  auto path = *config_.log_path;
  path += ".snapshot.json";
  write_json_file(path, {{"sessions", sessions}, {"regeneration_queue", queue}});
}

std::string ReviewService::start_session(const dataset::ReviewSample& sample) {
  std::unique_lock lock(mu_);
  std::vector<std::string> missing;
  for (const auto& id : sample.item_ids)
    if (!resolve_item(id, records_)) missing.push_back(id);
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? ", " : "") + missing[i];
    throw Error(ErrorCode::unknown_items,
                std::to_string(missing.size()) + " sample item(s) not found: " + list);
  }
  std::string id;
  do {
    id = "s" + std::to_string(next_session_++);
  } while (state_.has_session(id));
  LogEntry e;
  e.type = LogEntry::Type::session_started;
  e.session_id = id;
  e.sample = sample;
  e.policy = config_.reject_policy;
  append(e);
  return id;
}

void ReviewService::close_session(const std::string& session_id) {
  std::unique_lock lock(mu_);
  if (state_.session(session_id).closed) return;
  LogEntry e;
  e.type = LogEntry::Type::session_closed;
  e.session_id = session_id;
  append(e);
}

nlohmann::json ReviewService::describe(const std::string& item_id) const {
  const auto ref = resolve_item(item_id, records_);
  if (!ref) throw Error(ErrorCode::unknown_items, "item '" + item_id + "' not found");
  const auto& record = records_.at(ref->image_id);
  nlohmann::json j{{"item_id", item_id},
                   {"item_kind", to_string(ref->kind)},
                   {"image_id", record.image_id},
                   {"image_path", record.file_path},
                   {"image_url", "/items/" + item_id + "/image"}};
  if (record.caption) j["caption"] = record.caption->text;
  if (ref->kind != ItemKind::caption) {
    const QaItem* q = find_question(record, ref->question_id);
    j["question_id"] = q->question_id;
    j["question"] = q->question_text;
    j["answer_mode"] = to_string(q->answer_mode);
    nlohmann::json answers = nlohmann::json::array();
    for (const auto& a : q->answers) {
      answers.push_back({{"answer_id", a.answer_id}, {"text", a.text}, {"generator_model", a.generator_model}});
      if (a.answer_id == ref->answer_id) j["answer"] = a.text;
    }
    j["answers"] = answers;
    if (ref->kind == ItemKind::answer) j["answer_id"] = ref->answer_id;
  }
  return j;
}

nlohmann::json ReviewService::get_batch(const std::string& session_id, std::size_t n) const {
  std::shared_lock lock(mu_);
  if (state_.session(session_id).closed)
    throw Error(ErrorCode::session_closed, "session '" + session_id + "' is closed");
  nlohmann::json items = nlohmann::json::array();
  for (const auto& id : state_.pending(session_id)) {
    if (items.size() >= n) break;
    items.push_back(describe(id));
  }
  return items;
}

void ReviewService::apply_edit(const ItemRef& ref, const ReviewVerdict& v) {
  auto& record = records_.at(ref.image_id);
  const std::string& text = *v.edited_text;
  switch (ref.kind) {
    case ItemKind::caption:
      record.caption->text = text;
      record.caption->word_count = count_words(text);
      break;
    case ItemKind::question:
      for (auto& q : record.qa_items)
        if (q.question_id == ref.question_id) q.question_text = text;
      break;
    case ItemKind::answer:
      for (auto& q : record.qa_items) {
        if (q.question_id != ref.question_id) continue;
        for (auto& a : q.answers)
          if (a.answer_id == ref.answer_id) a.text = text;
        std::vector<std::string> texts;
        for (const auto& a : q.answers) texts.push_back(a.text);
        q.multiple_choice_answer = modal_answer(texts);
      }
      break;
  }
  const std::string note = "review edit " + v.item_id + " by " + (v.reviewer_id.empty() ? "unknown" : v.reviewer_id) +
                           " at " + v.timestamp;
  if (std::find(record.notes.begin(), record.notes.end(), note) == record.notes.end()) record.notes.push_back(note);
  if (config_.records_dir) save_record(*config_.records_dir, record);
}

ReviewSessionStats ReviewService::post_verdict(const std::string& session_id, ReviewVerdict verdict) {
  std::unique_lock lock(mu_);
  const auto ref = resolve_item(verdict.item_id, records_);
  if (!ref) throw Error(ErrorCode::unknown_items, "item '" + verdict.item_id + "' not found");
  verdict.item_kind = ref->kind;
  if (verdict.timestamp.empty()) verdict.timestamp = utc_now();
  LogEntry e;
  e.type = LogEntry::Type::verdict;
  e.session_id = session_id;
  e.verdict = verdict;
  append(e);
  if (verdict.decision == Decision::edit) apply_edit(*ref, verdict);
  return state_.stats(session_id);
}

ReviewSessionStats ReviewService::stats(const std::string& session_id) const {
  std::shared_lock lock(mu_);
  return state_.stats(session_id);
}

std::vector<RegenerationEntry> ReviewService::regeneration_queue() const {
  std::shared_lock lock(mu_);
  return state_.regeneration_queue();
}

std::vector<LogEntry> ReviewService::log() const {
  std::shared_lock lock(mu_);
  return log_;
}

std::vector<ImageRecord> ReviewService::records() const {
  std::shared_lock lock(mu_);
  std::vector<ImageRecord> out;
  for (const auto& [_, r] : records_) out.push_back(r);
  return out;
}

std::filesystem::path ReviewService::image_path(const std::string& item_id) const {
  std::shared_lock lock(mu_);
  const auto ref = resolve_item(item_id, records_);
  if (!ref) throw Error(ErrorCode::unknown_items, "item '" + item_id + "' not found");
  return records_.at(ref->image_id).file_path;
}

}  // namespace foundry::review
