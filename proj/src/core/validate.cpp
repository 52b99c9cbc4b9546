#include "foundry/core/validate.h"

#include <algorithm>
#include <set>

#include "foundry/core/text.h"

namespace foundry {
namespace {

class Collector {
 public:
  void add(std::string field, std::string message) {
    out_.push_back({std::move(field), std::move(message)});
  }
  std::vector<StructuralViolation> take() { return std::move(out_); }

 private:
  std::vector<StructuralViolation> out_;
};

void check_caption(const ImageRecord& r, bool complete, Collector& c) {
  if (!r.caption) {
    if (complete) c.add("caption", "complete record requires a caption");
    return;
  }
  const Caption& cap = *r.caption;
  if (complete && trim(cap.text).empty()) c.add("caption.text", "caption text is empty");
  if (cap.word_count != count_words(cap.text))
    c.add("caption.word_count", "word_count does not equal whitespace token count of text");
  if (cap.temperature < 0.0 || cap.temperature > 2.0) c.add("caption.temperature", "temperature outside [0, 2]");
}

void check_item(const QaItem& q, bool complete, Collector& c) {
  const std::string base = "qa_items[" + q.question_id + "]";
  const bool closed = q.answer_mode == AnswerMode::closed;
  if (closed != q.closed_type.has_value())
    c.add(base + ".closed_type", "closed_type must be present iff answer_mode is closed");

  if (complete && q.answers.size() != kAnswersPerQuestion) {
    c.add(base + ".answers", "expected " + std::to_string(kAnswersPerQuestion) + " answers, found " +
                                 std::to_string(q.answers.size()));
  } else if (complete) {
    std::set<int> ids;
    for (const auto& a : q.answers) ids.insert(a.answer_id);
    const bool covers = ids.size() == kAnswersPerQuestion && *ids.begin() == 1 &&
                        *ids.rbegin() == static_cast<int>(kAnswersPerQuestion);
    if (!covers) c.add(base + ".answers.answer_id", "answer_id values must be distinct and cover 1..10");
  } else {
    std::set<int> ids;
    for (const auto& a : q.answers) {
      if (a.answer_id < 1 || a.answer_id > static_cast<int>(kAnswersPerQuestion) || !ids.insert(a.answer_id).second) {
        c.add(base + ".answers.answer_id", "answer_id values must be distinct and within 1..10");
        break;
      }
    }
  }

  if (complete && closed && !q.multiple_choice_answer)
    c.add(base + ".multiple_choice_answer", "closed item requires multiple_choice_answer");
  if (complete && q.multiple_choice_answer && !q.answers.empty()) {
    std::vector<std::string> texts;
    for (const auto& a : q.answers) texts.push_back(a.text);
    if (*q.multiple_choice_answer != modal_answer(texts))
      c.add(base + ".multiple_choice_answer", "multiple_choice_answer is not the modal normalized answer");
  }
}

void check_trace(const ImageRecord& r, Collector& c) {
  const GenerationTrace& t = r.trace;
  int caption_verdicts = 0, question_verdicts = 0;
  std::map<std::string, int> answer_verdicts;
  for (const auto& v : t.verdicts) {
    switch (v.stage) {
      case Stage::caption: ++caption_verdicts; break;
      case Stage::question: ++question_verdicts; break;
      case Stage::answer: ++answer_verdicts[v.question_id]; break;
    }
    if (v.verdict == VerdictOutcome::fail && v.reason.empty())
      c.add("trace.verdicts", "failed verdict without a reason");
  }
  if (caption_verdicts != t.caption_attempts)
    c.add("trace.caption_attempts", "caption attempts differ from caption verdict count");
  if (question_verdicts != t.question_attempts)
    c.add("trace.question_attempts", "question attempts differ from question verdict count");
  if (answer_verdicts != t.answer_attempts)
    c.add("trace.answer_attempts", "answer attempts differ from per-question verdict counts");
  if (r.status == RecordStatus::complete) {
    if (t.caption_attempts < 1) c.add("trace.caption_attempts", "complete record needs >= 1 caption attempt");
    if (t.question_attempts < 1) c.add("trace.question_attempts", "complete record needs >= 1 question attempt");
  }
}

}  // namespace

std::vector<StructuralViolation> validate_record(const ImageRecord& record) {
  Collector c;
  const bool complete = record.status == RecordStatus::complete;
  if (record.image_id.empty()) c.add("image_id", "image_id is empty");

  check_caption(record, complete, c);

  if (complete) {
    if (record.qa_items.size() != kQuestionsPerImage) {
      c.add("qa_items", "expected " + std::to_string(kQuestionsPerImage) + " qa_items, found " +
                            std::to_string(record.qa_items.size()));
    } else {
      const auto closed = static_cast<std::size_t>(std::count_if(
          record.qa_items.begin(), record.qa_items.end(),
          [](const QaItem& q) { return q.answer_mode == AnswerMode::closed; }));
      if (closed < kMinClosed || closed > kMaxClosed)
        c.add("qa_items.answer_mode", "closed-ended count must be 2 or 3, found " + std::to_string(closed));
    }
    if (record.failure) c.add("failure", "complete record carries a failure");
  }
  if (record.status == RecordStatus::failed && !record.failure)
    c.add("failure", "failed record must name the failing stage");

  std::set<std::string> qids;
  for (const auto& q : record.qa_items) {
    if (!qids.insert(q.question_id).second) c.add("qa_items.question_id", "duplicate question_id " + q.question_id);
    check_item(q, complete, c);
  }
  check_trace(record, c);
  return c.take();
}

}  // namespace foundry
