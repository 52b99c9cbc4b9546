#include "foundry/agents/orchestrator.h"

#include <algorithm>
#include <atomic>
#include <thread>

#include "foundry/core/serialize.h"
#include "foundry/core/text.h"

namespace foundry::agents {
namespace {

struct AttemptOutcome {
  bool pass = false;
  std::string reason;
  bool fatal = false;  // provider unusable: stop the record now
};

bool is_regenerable(ErrorCode code) {
  return code == ErrorCode::schema_parse_failure || code == ErrorCode::empty_completion ||
         code == ErrorCode::short_batch;
}

// Runs one generate+validate attempt. Regenerable agent errors count as a
// failed attempt; provider failures are fatal for the record.
template <typename Fn>
AttemptOutcome attempt_stage(Fn&& fn) {
  try {
    Verdict v = fn();
    return {v.pass, v.reason, false};
  } catch (const Error& e) {
    if (is_regenerable(e.code())) return {false, std::string(to_string(e.code())) + ": " + e.what(), false};
    return {false, std::string(to_string(e.code())) + ": " + e.what(), true};
  }
}

void record_verdict(ImageRecord& r, Stage stage, int attempt, const AttemptOutcome& o, const std::string& qid = {}) {
  r.trace.verdicts.push_back(
      {stage, attempt, o.pass ? VerdictOutcome::pass : VerdictOutcome::fail, o.pass ? std::string{} : o.reason, qid});
}

ImageRecord fail(ImageRecord r, Stage stage, std::string qid, std::string reason) {
  r.status = RecordStatus::failed;
  r.failure = StageFailure{stage, std::move(qid), std::move(reason)};
  return r;
}

void fill_modal_answer(QaItem& item) {
  std::vector<std::string> texts;
  for (const auto& a : item.answers) texts.push_back(a.text);
  item.multiple_choice_answer = modal_answer(texts);
}

}  // namespace

void RecordStore::put(const ImageRecord& record) {
  std::lock_guard lock(mu_);
  save_record(dir_, record);
}

ImageRecord run_generation(ImageRecord r, const AgentContext& ctx, std::size_t ordinal) {
  const auto& cfg = ctx.config;
  r.failure.reset();

  // Caption.
  if (!r.caption) {
    const int cap = cfg.attempts_cap(Stage::caption);
    while (!r.caption) {
      if (r.trace.caption_attempts >= cap)
        return fail(std::move(r), Stage::caption, {}, "StageExhausted: caption failed validation " + std::to_string(cap) + " times");
      const int attempt = ++r.trace.caption_attempts;
      Caption candidate;
      auto outcome = attempt_stage([&] {
        candidate = generate_caption(r, ctx, ordinal, attempt);
        return validate(Stage::caption, candidate, r, ctx, attempt);
      });
      record_verdict(r, Stage::caption, attempt, outcome);
      if (outcome.fatal) return fail(std::move(r), Stage::caption, {}, outcome.reason);
      if (outcome.pass) r.caption = std::move(candidate);
    }
  }

  // Questions: the five-question set is validated and regenerated as a unit.
  if (r.qa_items.empty()) {
    const int cap = cfg.attempts_cap(Stage::question);
    while (r.qa_items.empty()) {
      if (r.trace.question_attempts >= cap)
        return fail(std::move(r), Stage::question, {}, "StageExhausted: questions failed validation " + std::to_string(cap) + " times");
      const int attempt = ++r.trace.question_attempts;
      std::vector<QaItem> candidate;
      auto outcome = attempt_stage([&] {
        candidate = generate_questions(r, *r.caption, r.detections, ctx, ordinal, attempt);
        return validate(Stage::question, candidate, r, ctx, attempt);
      });
      record_verdict(r, Stage::question, attempt, outcome);
      if (outcome.fatal) return fail(std::move(r), Stage::question, {}, outcome.reason);
      if (outcome.pass) r.qa_items = std::move(candidate);
    }
  }

  // Answers, per question.
  const int cap = cfg.attempts_cap(Stage::answer);
  for (auto& item : r.qa_items) {
    if (item.answers.size() == kAnswersPerQuestion) continue;
    item.answers.clear();
    int& attempts = r.trace.answer_attempts[item.question_id];
    while (item.answers.empty()) {
      if (attempts >= cap) {
        const std::string qid = item.question_id;
        return fail(std::move(r), Stage::answer, qid,
                    "StageExhausted: answers for " + qid + " failed validation " + std::to_string(cap) + " times");
      }
      const int attempt = ++attempts;
      QaItem candidate = item;
      auto outcome = attempt_stage([&] {
        candidate.answers = generate_answers(r, item, ctx, attempt);
        fill_modal_answer(candidate);
        return validate(Stage::answer, candidate, r, ctx, attempt);
      });
      record_verdict(r, Stage::answer, attempt, outcome, item.question_id);
      if (outcome.fatal) {
        const std::string qid = item.question_id;
        return fail(std::move(r), Stage::answer, qid, outcome.reason);
      }
      if (outcome.pass) item = std::move(candidate);
    }
  }

  r.status = RecordStatus::complete;
  return r;
}

std::vector<ImageRecord> run_pipeline(std::vector<ImageRecord> images, const AgentContext& ctx, RecordStore* store) {
  std::vector<ImageRecord> out(images.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < images.size(); i = next++) {
      out[i] = run_generation(std::move(images[i]), ctx, i);
      if (store) store->put(out[i]);
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, ctx.config.parallelism));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, images.size()); ++t) pool.emplace_back(worker);
  }
  return out;
}

std::vector<ImageRecord> discover_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorCode::io_error, "image directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = to_lower(entry.path().extension().string());
    if (ext == ".jpg" || ext == ".jpeg" || ext == ".png" || ext == ".webp") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<ImageRecord> out;
  for (const auto& f : files) {
    ImageRecord r;
    r.image_id = f.stem().string();
    r.file_path = f.string();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace foundry::agents
