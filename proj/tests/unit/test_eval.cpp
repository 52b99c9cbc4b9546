#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include "fixtures.h"
#include "foundry/core/error.h"
#include "foundry/eval/caption_metrics.h"
#include "foundry/eval/evaluate.h"
#include "foundry/eval/judge.h"
#include "foundry/eval/vqa.h"

using namespace foundry;
using namespace foundry::eval;
using nlohmann::json;

namespace {

json golden() {
  std::ifstream in(std::string(FOUNDRY_TEST_DATA) + "/metric_golden.json");
  return json::parse(in);
}

std::vector<std::string> ten(int yes, const std::string& a = "yes", const std::string& b = "no") {
  std::vector<std::string> out(static_cast<std::size_t>(yes), a);
  out.resize(10, b);
  return out;
}

// Straightforward re-derivations used for randomized agreement checks.
namespace oracle {

using Tokens = std::vector<std::string>;

int count_occurrences(const Tokens& t, const Tokens& gram) {
  int c = 0;
  for (std::size_t i = 0; i + gram.size() <= t.size(); ++i)
    if (std::equal(gram.begin(), gram.end(), t.begin() + static_cast<long>(i))) ++c;
  return c;
}

double bleu(const Tokens& c, const std::vector<Tokens>& refs) {
  if (c.empty()) return 0.0;
  double logs = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    int total = 0, clipped = 0;
    std::vector<Tokens> done;
    for (std::size_t i = 0; i + n <= c.size(); ++i) {
      Tokens g(c.begin() + static_cast<long>(i), c.begin() + static_cast<long>(i + n));
      ++total;
      if (std::find(done.begin(), done.end(), g) != done.end()) continue;
      done.push_back(g);
      int best = 0;
      for (const auto& r : refs) best = std::max(best, count_occurrences(r, g));
      clipped += std::min(count_occurrences(c, g), best);
    }
    logs += std::log(total && clipped ? static_cast<double>(clipped) / total : 1e-9);
  }
  std::size_t closest = refs[0].size();
  for (const auto& r : refs) {
    const long d = std::labs(static_cast<long>(r.size()) - static_cast<long>(c.size()));
    const long dc = std::labs(static_cast<long>(closest) - static_cast<long>(c.size()));
    if (d < dc || (d == dc && r.size() < closest)) closest = r.size();
  }
  const double bp = c.size() > closest ? 1.0 : std::exp(1.0 - static_cast<double>(closest) / c.size());
  return bp * std::exp(logs / 4.0);
}

std::size_t lcs(const Tokens& a, const Tokens& b, std::size_t i, std::size_t j,
                std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  auto key = std::make_pair(i, j);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  const std::size_t v = a[i] == b[j] ? 1 + lcs(a, b, i + 1, j + 1, memo)
                                     : std::max(lcs(a, b, i + 1, j, memo), lcs(a, b, i, j + 1, memo));
  return memo[key] = v;
}

double rouge(const Tokens& c, const std::vector<Tokens>& refs) {
  double best = 0.0;
  for (const auto& r : refs) {
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    const double l = static_cast<double>(lcs(c, r, 0, 0, memo));
    if (l == 0) continue;
    const double p = l / c.size(), rec = l / r.size();
    best = std::max(best, 2.44 * p * rec / (rec + 1.44 * p));
  }
  return best;
}

}  // namespace oracle

std::string random_sentence(std::mt19937& g, int max_len) {
  static const std::vector<std::string> vocab{"the", "car", "rain", "glare", "road", "a", "sun", "fog", "light"};
  std::uniform_int_distribution<int> len(1, max_len);
  std::uniform_int_distribution<std::size_t> w(0, vocab.size() - 1);
  std::string s;
  for (int i = len(g); i > 0; --i) s += vocab[w(g)] + (i > 1 ? " " : "");
  return s;
}

}  // namespace

TEST_CASE("tokenizer lowercases and strips punctuation") {
  CHECK(tokenize_caption("  Heavy RAIN, on the road!  ") == std::vector<std::string>{"heavy", "rain", "on", "the", "road"});
  CHECK(tokenize_caption("... --").empty());
}

TEST_CASE("hand-counted examples") {
  const std::vector<std::string> ref{"the cat sat on a mat"};
  CHECK(bleu4("the cat sat on the mat", ref) == doctest::Approx(std::pow(5.0 / 6 * 3.0 / 5 * 2.0 / 4 * 1.0 / 3, 0.25)));
  CHECK(bleu4("the cat sat on the mat", ref) == doctest::Approx(0.537285).epsilon(1e-6));

  const std::vector<std::string> r2{"a c d"};
  const double p = 0.75, r = 1.0, b2 = 1.44;
  CHECK(rouge_l("a b c d", r2) == doctest::Approx((1 + b2) * p * r / (r + b2 * p)));
}

TEST_CASE("golden suite matches the brute-force oracle to 1e-9") {
  const json g = golden();
  for (const auto& c : g["cases"]) {
    const auto refs = c["references"].get<std::vector<std::string>>();
    const auto cand = c["candidate"].get<std::string>();
    CAPTURE(cand);
    CHECK(std::abs(bleu4(cand, refs) - c["bleu4"].get<double>()) < 1e-9);
    CHECK(std::abs(rouge_l(cand, refs) - c["rouge_l"].get<double>()) < 1e-9);
    CHECK(std::abs(meteor_lite(cand, refs) - c["meteor_lite"].get<double>()) < 1e-9);
  }
  for (const char* suite : {"cider_suite", "cider_toy"}) {
    const auto& s = g[suite];
    const auto res = cider(s["candidates"].get<std::map<std::string, std::string>>(),
                           s["references"].get<std::map<std::string, std::vector<std::string>>>());
    double mean = 0.0;
    for (const auto& [id, v] : s["scores"].items()) {
      CHECK(std::abs(res.per_image.at(id) - v.get<double>()) < 1e-9);
      mean += v.get<double>();
    }
    CHECK(std::abs(res.corpus_mean - mean / s["scores"].size()) < 1e-9);
  }
}

TEST_CASE("randomized agreement with in-test oracles") {
  std::mt19937 g(7);
  for (int i = 0; i < 300; ++i) {
    const std::string cand = random_sentence(g, 12);
    std::vector<std::string> refs{random_sentence(g, 12), random_sentence(g, 12)};
    std::vector<oracle::Tokens> rt{tokenize_caption(refs[0]), tokenize_caption(refs[1])};
    const auto ct = tokenize_caption(cand);
    CHECK(std::abs(bleu4(cand, refs) - oracle::bleu(ct, rt)) < 1e-9);
    CHECK(std::abs(rouge_l(cand, refs) - oracle::rouge(ct, rt)) < 1e-9);
    for (double v : {bleu4(cand, refs), rouge_l(cand, refs), meteor_lite(cand, refs)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
    }
    CHECK(bleu4("  " + cand + "\n", refs) == bleu4(cand, refs));
    CHECK(rouge_l("\t" + cand, refs) == rouge_l(cand, refs));
  }
}

TEST_CASE("identity and disjoint inputs hit the extremes") {
  const std::string s = "dense fog hides the lane markings ahead";
  const std::vector<std::string> self{s};
  CHECK(bleu4(s, self) == doctest::Approx(1.0));
  CHECK(rouge_l(s, self) == doctest::Approx(1.0));
  const double m = 7;
  CHECK(meteor_lite(s, self) == doctest::Approx(1.0 - 0.5 / (m * m * m)));
  CHECK(meteor_lite("ahead markings lane the hides fog dense", self) < meteor_lite(s, self));

  const std::vector<std::string> other{"sunny beach volleyball game"};
  CHECK(bleu4(s, other) < 1e-6);
  CHECK(rouge_l(s, other) == 0.0);
  CHECK(meteor_lite(s, other) == 0.0);

  std::map<std::string, std::string> cands{{"a", "rain streaks across the windshield"},
                                           {"b", "a cyclist waits at the red light"},
                                           {"c", "tunnel exit with strong backlight glare"}};
  std::map<std::string, std::vector<std::string>> refs;
  for (const auto& [k, v] : cands) refs[k] = {v};
  const auto res = cider(cands, refs);
  for (const auto& [k, v] : res.per_image) CHECK(v == doctest::Approx(10.0));

  cands["a"] = "sunny beach volleyball";
  CHECK(cider(cands, refs).per_image.at("a") == 0.0);
}

TEST_CASE("CIDEr rejects tiny corpora and missing candidates") {
  try {
    cider({{"a", "x y"}}, {{"a", {"x y"}}});
    FAIL("expected CorpusTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::corpus_too_small);
  }
  CHECK_THROWS_AS(cider({{"a", "x"}}, {{"a", {"x"}}, {"b", {"y"}}}), Error);
}

TEST_CASE("VQA consensus accuracy") {
  CHECK(vqa_accuracy("yes", ten(8)) == 1.0);
  CHECK(vqa_accuracy("yes", ten(2)) == 2.0 / 3.0);
  CHECK(vqa_accuracy("maybe", ten(5)) == 0.0);
  CHECK(vqa_accuracy("Yes.", ten(3)) == 1.0);
  CHECK(vqa_accuracy("4", ten(1, "Four", "two")) == 1.0 / 3.0);
  CHECK(vqa_exact_match("no", ten(2)) == 1.0);
  CHECK(vqa_exact_match("yes", ten(2)) == 0.0);

  std::mt19937 g(3);
  for (int i = 0; i < 100; ++i) {
    auto gt = ten(static_cast<int>(g() % 11));
    const double before = vqa_accuracy("yes", gt);
    std::shuffle(gt.begin(), gt.end(), g);
    CHECK(vqa_accuracy("yes", gt) == before);
  }
}

TEST_CASE("judgment parsing") {
  CHECK(parse_judgment(R"({"relevance": 4, "trustworthiness": 5, "clarity": 3, "coherence": 2})") ==
        std::array<int, 4>{4, 5, 3, 2});
  CHECK(parse_judgment("Scores: 5, 4, 4, 3") == std::array<int, 4>{5, 4, 4, 3});
  CHECK_FALSE(parse_judgment("7").has_value());
  CHECK_FALSE(parse_judgment("5 5 5 7").has_value());
  CHECK_FALSE(parse_judgment("5 5 5").has_value());
}

namespace {

struct JudgeSetup {
  providers::ProviderRegistry registry;
  std::shared_ptr<providers::SimulatedProvider> judge;
  JudgeContext ctx;

  explicit JudgeSetup(std::deque<std::string> replies) {
    providers::SimulatedProviderScript script;
    script.seed = 5;
    if (!replies.empty()) script.scripted_responses["judge"] = std::move(replies);
    judge = std::make_shared<providers::SimulatedProvider>("judge", script);
    registry.add(judge);
    ctx.registry = &registry;
    ctx.config.provider = "judge";
    ctx.sleep = [](providers::Seconds) {};
  }
};

const JudgeRequest kRequest{"q1", "What degrades perception?", "rain", "", "heavy rain"};

}  // namespace

TEST_CASE("judge scores and aggregation") {
  JudgeSetup five({"5 5 5 5", "5 5 5 5", "5 5 5 5"});
  const auto all5 = judge_open_ended(kRequest, five.ctx);
  CHECK(all5.relevance == 5.0);
  CHECK(all5.overall == 5.0);
  CHECK(all5.repetitions == 3);

  JudgeSetup mixed({"4 4 4 4", R"({"relevance":5,"trustworthiness":5,"clarity":5,"coherence":5})", "3,3,3,3"});
  const auto m = judge_open_ended(kRequest, mixed.ctx);
  CHECK(m.relevance == 4.0);
  CHECK(m.trustworthiness == 4.0);
  CHECK(m.clarity == 4.0);
  CHECK(m.coherence == 4.0);
  CHECK(m.overall == 4.0);

  const auto agg = aggregate_rubric({{{5, 4, 3, 2}}, {{4, 4, 2, 2}}});
  CHECK(agg.relevance == 4.5);
  CHECK(agg.trustworthiness == 4.0);
  CHECK(agg.clarity == 2.5);
  CHECK(agg.coherence == 2.0);
  CHECK(agg.overall == (4.5 + 4.0 + 2.5 + 2.0) / 4.0);
}

TEST_CASE("judge requests carry the defaults") {
  JudgeSetup s({});
  judge_open_ended(kRequest, s.ctx);
  const auto log = s.judge->request_log();
  REQUIRE(log.size() == 3);
  for (const auto& e : log) {
    CHECK(e.temperature == 0.7);
    CHECK(e.purpose == "judge");
  }
  CHECK(log[0].request_key == "q1/judge/1/1");
  CHECK(log[2].request_key == "q1/judge/3/1");
}

TEST_CASE("an unparsable judge reply is re-asked once") {
  JudgeSetup recover({"7", "4 4 4 4", "4 4 4 4", "4 4 4 4"});
  CHECK(judge_open_ended(kRequest, recover.ctx).overall == 4.0);
  CHECK(recover.judge->call_count() == 4);

  JudgeSetup bad({"7", "7"});
  try {
    judge_open_ended(kRequest, bad.ctx);
    FAIL("expected UnparsableJudgment");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unparsable_judgment);
  }
  CHECK(bad.judge->call_count() == 2);
}

namespace {

std::vector<Prediction> oracle_predictions(const std::vector<ImageRecord>& records) {
  std::vector<Prediction> out;
  for (const auto& r : records) {
    out.push_back({std::nullopt, r.image_id, r.caption->text});
    for (const auto& q : r.qa_items) out.push_back({q.question_id, std::nullopt, *q.multiple_choice_answer});
  }
  return out;
}

}  // namespace

TEST_CASE("evaluation with oracle predictions") {
  const auto records = fixtures::make_records(6, 11);
  const auto preds = oracle_predictions(records);
  JudgeSetup s({});
  EvalOptions opts{true, s.ctx};
  const auto report = evaluate_dataset(records, preds, opts);
  CHECK(report.closed_accuracy == 1.0);
  CHECK(report.closed_exact_match == 1.0);
  CHECK(report.caption_metrics.at("BLEU-4") == doctest::Approx(1.0));
  CHECK(report.caption_metrics.at("ROUGE-L") == doctest::Approx(1.0));
  CHECK(report.caption_metrics.count("CIDEr") == 1);
  CHECK(report.n_captions == 6);
  CHECK(report.n_closed + report.n_open == 30);
  REQUIRE(report.rubric_means);
  CHECK(report.n_open_judged == report.n_open);
  CHECK(report.items.size() == preds.size());
}

TEST_CASE("evaluation is order invariant and omits empty sections") {
  const auto records = fixtures::make_records(4, 12);
  std::vector<Prediction> closed_only;
  for (const auto& p : oracle_predictions(records)) {
    if (!p.question_id) continue;
    for (const auto& r : records)
      for (const auto& q : r.qa_items)
        if (q.question_id == *p.question_id && q.answer_mode == AnswerMode::closed) closed_only.push_back(p);
  }
  EvalOptions opts;
  const auto a = to_json(evaluate_dataset(records, closed_only, opts));
  std::mt19937 g(2);
  std::shuffle(closed_only.begin(), closed_only.end(), g);
  const auto b = to_json(evaluate_dataset(records, closed_only, opts));
  CHECK(a.dump() == b.dump());
  CHECK_FALSE(a["aggregate"].contains("rubric_means"));
  CHECK_FALSE(a["aggregate"].contains("caption_metrics"));
}

TEST_CASE("unparsable judgments are excluded and counted") {
  const auto records = fixtures::make_records(2, 13);
  std::vector<Prediction> open;
  for (const auto& r : records)
    for (const auto& q : r.qa_items)
      if (q.answer_mode == AnswerMode::open) open.push_back({q.question_id, std::nullopt, "slow down"});
  std::deque<std::string> replies(open.size() * 6, "no idea");
  JudgeSetup s(replies);
  s.ctx.config.concurrency = 1;
  const auto report = evaluate_dataset(records, open, EvalOptions{true, s.ctx});
  CHECK(report.n_unparsable == static_cast<int>(open.size()));
  CHECK(report.n_open_judged == 0);
  CHECK_FALSE(report.rubric_means.has_value());
}

TEST_CASE("prediction ids must match the dataset") {
  const auto records = fixtures::make_records(2, 14);
  EvalOptions opts;
  const std::vector<Prediction> unknown{{std::string("nope_q1"), std::nullopt, "yes"}};
  try {
    evaluate_dataset(records, unknown, opts);
    FAIL("expected IdMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::id_mismatch);
  }
  const std::string qid = records[0].qa_items[0].question_id;
  const std::vector<Prediction> dup{{qid, std::nullopt, "yes"}, {qid, std::nullopt, "no"}};
  CHECK_THROWS_AS(evaluate_dataset(records, dup, opts), Error);

  const json doc = json::array({{{"question_id", qid}, {"text", "yes"}}, {{"image_id", 2}, {"text", "a caption"}}});
  const auto parsed = parse_predictions(doc, records);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].question_id == qid);
  CHECK(parsed[1].image_id == records[1].image_id);
}
