#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <random>
#include <set>

#include "fixtures.h"
#include "foundry/core/error.h"
#include "foundry/core/serialize.h"
#include "foundry/dataset/formats.h"
#include "foundry/dataset/sampling.h"
#include "foundry/dataset/split.h"
#include "foundry/dataset/stats.h"

using namespace foundry;
using namespace foundry::dataset;
using nlohmann::json;

namespace {

const std::filesystem::path kFormats = std::filesystem::path(FOUNDRY_TEST_DATA) / "formats";

// Byte-exact comparison against a checked-in file; FOUNDRY_UPDATE_GOLDEN=1 rewrites it.
void check_golden(const std::string& name, const json& actual) {
  const auto path = kFormats / name;
  if (std::getenv("FOUNDRY_UPDATE_GOLDEN")) write_json_file(path, actual);
  REQUIRE(std::filesystem::exists(path));
  CHECK(read_json_file(path) == actual);
}

}  // namespace

TEST_CASE("numeric ids") {
  const auto recs = fixtures::make_records(3, 1, "x");
  const auto ids = assign_numeric_ids(recs);
  CHECK(ids.at("x_000") == 1);
  CHECK(ids.at("x_002") == 3);
  CHECK(numeric_question_id(2, 4) == 2005);
  CHECK(numeric_question_id(1, 0) == 1001);
}

TEST_CASE("COCO caption export") {
  const auto recs = fixtures::make_records(2, 2);
  const auto doc = export_coco_captions(recs, assign_numeric_ids(recs));
  CHECK(doc["images"].size() == 2);
  CHECK(doc["annotations"].size() == 2);
  for (const auto& a : doc["annotations"]) CHECK((a["image_id"] == 1 || a["image_id"] == 2));
  const auto back = import_coco_captions(doc);
  REQUIRE(back.size() == 2);
  CHECK(back[0].caption == recs[0].caption->text);

  auto broken = recs;
  broken[1].caption.reset();
  try {
    export_coco_captions(broken, assign_numeric_ids(broken));
    FAIL("expected IncompleteRecord");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::incomplete_record);
  }
}

TEST_CASE("VQA export cardinality") {
  Rng rng(4);
  auto rec = fixtures::make_record("one", rng);
  rec.qa_items[0].closed_type = ClosedType::counting;
  rec.qa_items[0].expected_answer_type = ExpectedAnswerType::count;
  const std::vector<ImageRecord> recs{rec};
  const auto vqa = export_vqa(recs, assign_numeric_ids(recs));
  CHECK(vqa.questions["questions"].size() == 5);
  REQUIRE(vqa.annotations["annotations"].size() == 5);
  for (const auto& a : vqa.annotations["annotations"]) {
    REQUIRE(a["answers"].size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(a["answers"][i]["answer_id"] == i + 1);
  }
  CHECK(vqa.annotations["annotations"][0]["question_type"] == "counting");
  CHECK(vqa.annotations["annotations"][0]["answer_type"] == "number");
  CHECK(vqa_answer_type(ExpectedAnswerType::yes_no_multiple_choice) == "yes/no");
  CHECK(vqa_answer_type(ExpectedAnswerType::analysis) == "other");
}

TEST_CASE("exports match the golden files") {
  const auto recs = fixtures::golden_records();
  const auto ids = assign_numeric_ids(recs);
  check_golden("golden_captions.json", export_coco_captions(recs, ids));
  const auto vqa = export_vqa(recs, ids);
  check_golden("golden_questions.json", vqa.questions);
  check_golden("golden_annotations.json", vqa.annotations);
  check_golden("golden_metadata.json", export_metadata(recs, ids));
}

TEST_CASE("full round trip through files and sidecar is lossless") {
  fixtures::TempDir dir;
  auto recs = fixtures::make_records(20, 5);
  split_records(recs, 0.8, 9);
  write_dataset(recs, dir.path());
  for (const char* f : {"captions_train.json", "questions_test.json", "annotations_test.json", "metadata_train.json"})
    CHECK(std::filesystem::exists(dir / f));
  auto back = load_dataset(dir.path());
  std::sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.image_id < b.image_id; });
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) CHECK(serialize_record(back[i]) == serialize_record(recs[i]));
  CHECK(load_dataset(dir.path(), Split::test).size() == 4);

  auto pending = recs;
  pending[0].status = RecordStatus::pending;
  CHECK_THROWS_AS(write_dataset(pending, dir / "other"), Error);
}

TEST_CASE("official-format files parse") {
  const auto caps = import_coco_captions(read_json_file(kFormats / "thirdparty_captions.json"));
  CHECK(caps.size() == 3);
  CHECK(caps[0].file_name == "COCO_val2014_000000391895.jpg");
  const auto vqa = import_vqa(read_json_file(kFormats / "thirdparty_questions.json"),
                              read_json_file(kFormats / "thirdparty_annotations.json"));
  REQUIRE(vqa.size() == 2);
  CHECK(vqa[0].question == "Is the man wearing a helmet?");
  CHECK(vqa[0].answers.size() == 10);
  CHECK(vqa[1].answer_type == "number");

  auto questions = read_json_file(kFormats / "thirdparty_questions.json");
  questions["questions"].push_back({{"image_id", 1}, {"question", "orphan?"}, {"question_id", 77}});
  CHECK_THROWS_AS(import_vqa(questions, read_json_file(kFormats / "thirdparty_annotations.json")), Error);
}

TEST_CASE("third-party tooling accepts our export") {
  fixtures::TempDir dir;
  auto recs = fixtures::make_records(10, 6);
  split_records(recs, 0.9, 1);
  write_dataset(recs, dir.path());
  const std::string cmd = "python3 \"" + std::string(FOUNDRY_SOURCE_DIR) + "/tests/tools/check_formats.py\" \"" +
                          dir.path().string() + "\" \"" + kFormats.string() + "\" > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
}

TEST_CASE("image-level split") {
  std::vector<std::string> ids;
  for (int i = 0; i < 1114; ++i) ids.push_back("im" + std::to_string(i));
  const auto s = split_dataset(ids, 0.9, 42);
  CHECK(s.train.size() == 1002);
  CHECK(s.test.size() == 112);
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 1114);
  CHECK(split_dataset(ids, 0.9, 42).train == s.train);
  CHECK(split_dataset(ids, 0.9, 43).train != s.train);

  std::vector<std::string> ten(ids.begin(), ids.begin() + 10);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto t = split_dataset(ten, 0.9, seed);
    CHECK(t.train.size() == 9);
    CHECK(t.test.size() == 1);
  }
  auto shuffled = ten;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(split_dataset(shuffled, 0.9, 5).test == split_dataset(ten, 0.9, 5).test);
  CHECK_THROWS_AS(split_dataset(ten, 1.0, 1), Error);
  CHECK_THROWS_AS(split_dataset(ten, 0.0, 1), Error);
}

TEST_CASE("stats on a constructed fixture") {
  auto recs = fixtures::make_records(2, 8);
  const Difficulty pattern[5] = {Difficulty::easy, Difficulty::easy, Difficulty::medium, Difficulty::medium,
                                 Difficulty::hard};
  for (auto& r : recs)
    for (int k = 0; k < 5; ++k) r.qa_items[k].difficulty = pattern[k];
  recs[0].split = Split::train;
  recs[1].split = Split::test;
  const auto st = compute_stats(recs);
  CHECK(st.difficulty_counts.at("easy") == CountShare{4, 40.0});
  CHECK(st.difficulty_counts.at("medium") == CountShare{4, 40.0});
  CHECK(st.difficulty_counts.at("hard") == CountShare{2, 20.0});

  // Independent recount.
  std::size_t closed = 0, words = 0, answers = 0;
  for (const auto& r : recs)
    for (const auto& q : r.qa_items) {
      closed += q.answer_mode == AnswerMode::closed;
      for (const auto& a : q.answers) {
        ++answers;
        words += count_words(a.text);
      }
    }
  CHECK(st.question_mode_counts.at("closed").count == closed);
  CHECK(st.question_mode_counts.at("open").count == 10 - closed);
  CHECK(st.question_mode_counts.at("closed").percent == closed * 10.0);
  CHECK(st.splits.at("all").n_questions == 10);
  CHECK(st.splits.at("all").n_answers == answers);
  CHECK(st.splits.at("train").n_captions == 1);
  CHECK(st.splits.at("test").n_questions == 5);
  CHECK(st.splits.at("all").avg_answer_len == doctest::Approx(static_cast<double>(words) / answers));
  CHECK(st.attempt_means.at("caption") == 1.0);

  auto perm = recs;
  std::reverse(perm.begin(), perm.end());
  CHECK(compute_stats(perm) == st);
}

TEST_CASE("attempt means come from every trace") {
  ImageRecord a, b;
  a.image_id = "a";
  b.image_id = "b";
  a.trace.caption_attempts = 1;
  a.trace.question_attempts = 1;
  a.trace.answer_attempts["a_q1"] = 1;
  b.trace.caption_attempts = 2;
  b.trace.question_attempts = 1;
  b.trace.answer_attempts["b_q1"] = 3;
  b.status = RecordStatus::failed;
  const auto st = compute_stats(std::vector{a, b});
  CHECK(st.attempt_means.at("caption") == 1.5);
  CHECK(st.attempt_means.at("question") == 1.0);
  CHECK(st.attempt_means.at("answer") == 2.0);
  CHECK(st.attempt_histograms.at("answer").at(3) == 1);
  CHECK(st.splits.count("all") == 0);
}

TEST_CASE("largest-remainder shares sum to 100") {
  std::mt19937 g(1);
  for (int i = 0; i < 200; ++i) {
    std::map<std::string, std::size_t> counts;
    for (int k = 0; k < 5; ++k) counts["k" + std::to_string(k)] = g() % 1000;
    double sum = 0;
    for (const auto& [_, s] : to_shares(counts)) sum += s.percent;
    CHECK(sum == doctest::Approx(100.0).epsilon(1e-12));
  }
  const auto third = to_shares({{"a", 1}, {"b", 1}, {"c", 1}});
  CHECK(third.at("a").percent + third.at("b").percent + third.at("c").percent == doctest::Approx(100.0));
}

TEST_CASE("Cochran sample sizes") {
  const auto s = cochran_sample_size(6684, 0.95, 0.04, 0.5);
  const double z = 1.959963984540054;
  const double n0 = z * z * 0.25 / (0.04 * 0.04);
  CHECK(s.n0 == doctest::Approx(n0));
  CHECK(s.n0 == doctest::Approx(600.25).epsilon(1e-3));
  CHECK(s.n == static_cast<std::size_t>(std::ceil(n0 / (1 + (n0 - 1) / 6684))));
  CHECK(s.n == 551);
  CHECK_FALSE(s.clamped);

  const auto small = cochran_sample_size(100, 0.95, 0.5, 0.5);
  CHECK(small.n <= 100);
  CHECK(small.n == static_cast<std::size_t>(std::ceil(z * z * 0.25 / 0.25 / (1 + (z * z - 1) / 100))));
  CHECK_FALSE(small.clamped);

  const auto clamp = cochran_sample_size(10, 0.95, 0.001, 0.5);
  CHECK(clamp.n == 10);
  CHECK(clamp.clamped);
  CHECK(z_for_confidence(0.95) == doctest::Approx(z).epsilon(1e-12));
}

TEST_CASE("review samples are deterministic and well spread") {
  std::vector<std::string> pop;
  for (int i = 0; i < 6684; ++i) pop.push_back("item" + std::to_string(i));
  const auto a = sample_for_review(pop, 0.95, 0.04, 0.5, 11);
  CHECK(a.sample_size == 551);
  CHECK(a.item_ids.size() == 551);
  CHECK(std::set<std::string>(a.item_ids.begin(), a.item_ids.end()).size() == 551);
  CHECK(sample_for_review(pop, 0.95, 0.04, 0.5, 11) == a);
  CHECK(review_sample_from_json(to_json(a)) == a);

  // Overlap of two independent samples is hypergeometric with mean n^2/N (~45.4, sd ~6.4).
  double overlap_sum = 0;
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    const auto b = sample_for_review(pop, 0.95, 0.04, 0.5, seed);
    const std::set<std::string> sa(a.item_ids.begin(), a.item_ids.end());
    for (const auto& id : b.item_ids) overlap_sum += sa.count(id);
  }
  const double expected = 551.0 * 551.0 / 6684.0;
  CHECK(std::abs(overlap_sum / 20 - expected) < 4 * 6.4 / std::sqrt(20.0));

  CHECK_THROWS_AS(sample_for_review({}, 0.95, 0.04, 0.5, 1), Error);
  CHECK_THROWS_AS(sample_for_review(pop, 1.2, 0.04, 0.5, 1), Error);
}
