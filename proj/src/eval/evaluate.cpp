#include "foundry/eval/evaluate.h"

#include <algorithm>
#include <atomic>
#include <thread>

#include "foundry/core/error.h"
#include "foundry/core/text.h"
#include "foundry/dataset/formats.h"
#include "foundry/eval/caption_metrics.h"
#include "foundry/eval/vqa.h"

namespace foundry::eval {
namespace {

struct NumericLookup {
  std::map<std::int64_t, std::string> images;
  std::map<std::int64_t, std::string> questions;
};

NumericLookup build_lookup(std::span<const ImageRecord> records) {
  NumericLookup out;
  const auto ids = dataset::assign_numeric_ids(records);
  for (const auto& r : records) {
    const auto num = ids.at(r.image_id);
    out.images[num] = r.image_id;
    for (std::size_t k = 0; k < r.qa_items.size(); ++k)
      out.questions[dataset::numeric_question_id(num, k)] = r.qa_items[k].question_id;
  }
  return out;
}

std::string resolve(const nlohmann::json& v, const std::map<std::int64_t, std::string>& numeric,
                    const char* what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) {
    auto it = numeric.find(v.get<std::int64_t>());
    if (it == numeric.end()) throw Error(ErrorCode::id_mismatch, std::string("unknown numeric ") + what + " " + v.dump());
    return it->second;
  }
  throw Error(ErrorCode::schema_parse_failure, std::string(what) + " must be a string or integer");
}

std::vector<std::string> answer_texts(const QaItem& item) {
  std::vector<std::string> out;
  for (const auto& a : item.answers) out.push_back(a.text);
  return out;
}

}  // namespace

std::vector<Prediction> parse_predictions(const nlohmann::json& doc, std::span<const ImageRecord> records) {
  if (!doc.is_array()) throw Error(ErrorCode::schema_parse_failure, "predictions must be a JSON array");
  const auto lookup = build_lookup(records);
  std::vector<Prediction> out;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("text") || !entry["text"].is_string())
      throw Error(ErrorCode::schema_parse_failure, "prediction needs a string 'text': " + entry.dump());
    Prediction p;
    p.text = entry["text"].get<std::string>();
    const bool has_q = entry.contains("question_id"), has_i = entry.contains("image_id");
    if (has_q == has_i)
      throw Error(ErrorCode::schema_parse_failure, "prediction needs exactly one of question_id, image_id");
    if (has_q) p.question_id = resolve(entry["question_id"], lookup.questions, "question_id");
    else p.image_id = resolve(entry["image_id"], lookup.images, "image_id");
    out.push_back(std::move(p));
  }
  return out;
}

EvalReport evaluate_dataset(std::span<const ImageRecord> records, std::span<const Prediction> predictions,
                            const EvalOptions& options) {
  std::map<std::string, const ImageRecord*> images;
  std::map<std::string, std::pair<const ImageRecord*, const QaItem*>> questions;
  for (const auto& r : records) {
    images[r.image_id] = &r;
    for (const auto& q : r.qa_items) questions[q.question_id] = {&r, &q};
  }

  std::map<std::string, std::string> question_preds, caption_preds;
  for (const auto& p : predictions) {
    if (p.question_id) {
      if (!questions.count(*p.question_id))
        throw Error(ErrorCode::id_mismatch, "prediction for unknown question " + *p.question_id);
      if (!question_preds.emplace(*p.question_id, p.text).second)
        throw Error(ErrorCode::id_mismatch, "duplicate prediction for question " + *p.question_id);
    } else if (p.image_id) {
      auto it = images.find(*p.image_id);
      if (it == images.end()) throw Error(ErrorCode::id_mismatch, "prediction for unknown image " + *p.image_id);
      if (!it->second->caption) throw Error(ErrorCode::id_mismatch, "image " + *p.image_id + " has no caption");
      if (!caption_preds.emplace(*p.image_id, p.text).second)
        throw Error(ErrorCode::id_mismatch, "duplicate prediction for image " + *p.image_id);
    }
  }

  EvalReport report;
  std::vector<ItemResult> results;
  std::vector<JudgeRequest> judge_jobs;
  std::vector<std::size_t> judge_slots;

  double acc_sum = 0.0, exact_sum = 0.0;
  for (const auto& [qid, text] : question_preds) {
    const auto& [record, item] = questions.at(qid);
    ItemResult r;
    r.id = qid;
    if (item->answer_mode == AnswerMode::closed) {
      const auto gt = answer_texts(*item);
      r.kind = "closed";
      r.metrics["accuracy"] = vqa_accuracy(text, gt);
      r.metrics["exact_match"] = vqa_exact_match(text, gt);
      acc_sum += r.metrics["accuracy"];
      exact_sum += r.metrics["exact_match"];
      ++report.n_closed;
    } else {
      r.kind = "open";
      ++report.n_open;
      if (options.judge) {
        std::string reference = item->multiple_choice_answer.value_or(modal_answer(answer_texts(*item)));
        judge_jobs.push_back({qid, item->question_text, reference, record->file_path, text});
        judge_slots.push_back(results.size());
      }
    }
    results.push_back(std::move(r));
  }
  if (report.n_closed > 0) {
    report.closed_accuracy = acc_sum / report.n_closed;
    report.closed_exact_match = exact_sum / report.n_closed;
  }

  if (!judge_jobs.empty()) {
    std::vector<std::optional<RubricScores>> scores(judge_jobs.size());
    std::vector<std::optional<std::string>> errors(judge_jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < judge_jobs.size();) {
        try {
          scores[i] = judge_open_ended(judge_jobs[i], options.judge_ctx);
        } catch (const Error& e) {
          errors[i] = std::string(to_string(e.code())) + ": " + e.what();
        }
      }
    };
    const auto n_workers = static_cast<std::size_t>(std::max(1, options.judge_ctx.config.concurrency));
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < std::min(n_workers, judge_jobs.size()); ++w) pool.emplace_back(worker);
    }
    std::vector<RubricScores> judged;
    for (std::size_t i = 0; i < judge_jobs.size(); ++i) {
      auto& r = results[judge_slots[i]];
      if (scores[i]) {
        r.rubric = scores[i];
        r.metrics["overall"] = scores[i]->overall;
        judged.push_back(*scores[i]);
      } else {
        r.error = errors[i];
        if (errors[i] && errors[i]->rfind("UnparsableJudgment", 0) == 0) ++report.n_unparsable;
        else throw Error(ErrorCode::transport_error, "judge call failed for " + r.id + ": " + errors[i].value_or(""));
      }
    }
    report.n_open_judged = static_cast<int>(judged.size());
    if (!judged.empty()) report.rubric_means = mean_rubric(judged);
  }

  if (!caption_preds.empty()) {
    double bleu = 0.0, rouge = 0.0, meteor = 0.0;
    std::map<std::string, std::vector<std::string>> refs;
    for (const auto& [image_id, text] : caption_preds) {
      const std::vector<std::string> ref{images.at(image_id)->caption->text};
      refs[image_id] = ref;
      ItemResult r;
      r.id = image_id;
      r.kind = "caption";
      r.metrics["BLEU-4"] = bleu4(text, ref);
      r.metrics["ROUGE-L"] = rouge_l(text, ref);
      r.metrics["METEOR-lite"] = meteor_lite(text, ref);
      bleu += r.metrics["BLEU-4"];
      rouge += r.metrics["ROUGE-L"];
      meteor += r.metrics["METEOR-lite"];
      results.push_back(std::move(r));
    }
    const double n = static_cast<double>(caption_preds.size());
    report.n_captions = static_cast<int>(caption_preds.size());
    report.caption_metrics["BLEU-4"] = bleu / n;
    report.caption_metrics["ROUGE-L"] = rouge / n;
    report.caption_metrics["METEOR-lite"] = meteor / n;
    if (caption_preds.size() >= 2) {
      const auto c = cider(caption_preds, refs);
      report.caption_metrics["CIDEr"] = c.corpus_mean;
      for (auto& r : results)
        if (r.kind == "caption") r.metrics["CIDEr"] = c.per_image.at(r.id);
    }
  }

  std::sort(results.begin(), results.end(),
            [](const ItemResult& a, const ItemResult& b) { return std::tie(a.kind, a.id) < std::tie(b.kind, b.id); });
  report.items = std::move(results);
  return report;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json agg{{"n_items",
                      {{"closed", report.n_closed},
                       {"open", report.n_open},
                       {"open_judged", report.n_open_judged},
                       {"unparsable_judgments", report.n_unparsable},
                       {"captions", report.n_captions}}}};
  if (report.closed_accuracy) agg["closed_accuracy"] = *report.closed_accuracy;
  if (report.closed_exact_match) agg["closed_exact_match"] = *report.closed_exact_match;
  if (!report.caption_metrics.empty()) agg["caption_metrics"] = report.caption_metrics;
  if (report.rubric_means) agg["rubric_means"] = to_json(*report.rubric_means);

  nlohmann::json items = nlohmann::json::array();
  for (const auto& it : report.items) {
    nlohmann::json j{{"id", it.id}, {"kind", it.kind}, {"metrics", it.metrics}};
    if (it.rubric) j["rubric"] = to_json(*it.rubric);
    if (it.error) j["error"] = *it.error;
    items.push_back(std::move(j));
  }
  return {{"aggregate", agg}, {"items", items}};
}

}  // namespace foundry::eval
