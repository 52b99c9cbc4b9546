#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fixtures.h"
#include "foundry/cli/commands.h"
#include "foundry/cli/config.h"
#include "foundry/core/error.h"
#include "foundry/core/serialize.h"
#include "foundry/dataset/formats.h"

using namespace foundry;
using nlohmann::json;

namespace {

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "foundry");
  return cli::dispatch(args);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("exit codes") {
  CHECK(run({"--help"}) == 0);
  CHECK(run({"frobnicate"}) == 2);
  CHECK(run({}) == 2);
  CHECK(run({"stats", "--bogus"}) == 2);
  CHECK(run({"--config", "/nonexistent/config.json", "stats", "--records", "/tmp"}) == 1);
  fixtures::TempDir dir;
  CHECK(run({"evaluate", "--pred", (dir / "missing.json").string(), "--dataset", dir.path().string()}) == 1);
}

TEST_CASE("environment interpolation") {
  ::setenv("FOUNDRY_TEST_URL", "http://example.invalid", 1);
  ::unsetenv("FOUNDRY_TEST_UNSET");
  const json doc{{"a", "${FOUNDRY_TEST_URL}/v1"}, {"b", {"x${FOUNDRY_TEST_UNSET}y", 3}}};
  const json out = cli::interpolate_env(doc);
  CHECK(out["a"] == "http://example.invalid/v1");
  CHECK(out["b"][0] == "xy");
  CHECK(out["b"][1] == 3);
}

TEST_CASE("config parsing") {
  const auto def = cli::default_config();
  CHECK(def.providers.size() == 3);
  CHECK(def.judge.repetitions == 3);
  CHECK(def.judge.temperature == 0.7);
  CHECK(def.gateway.timeout_s == 10.0);

  ::setenv("FOUNDRY_TEST_KEY_NAME", "MY_KEY", 1);
  const json doc = json::parse(R"({
    "providers": [
      {"id": "gen-1", "type": "http", "base_url": "http://localhost:1", "model": "m", "api_key_env": "${FOUNDRY_TEST_KEY_NAME}"},
      {"id": "gen-2", "type": "simulated", "seed": 4},
      {"id": "val", "type": "simulated", "stages": {"validate_caption": {"pass_probability": 0.5}}}
    ],
    "pipeline": {"providers": ["gen-1", "gen-2"], "validator": "val", "parallelism": 2,
                 "max_attempts": {"answer": 3}},
    "gateway": {"timeout_s": 4, "backend": {"type": "simulated", "s0": 0.6, "capacity": 2}},
    "review": {"reject_policy": "remove"},
    "train_ratio": 0.8
  })");
  const auto c = cli::parse_config(doc);
  REQUIRE(c.providers.size() == 3);
  const auto& http = std::get<providers::HttpProviderConfig>(c.providers[0]);
  CHECK(http.api_key_env == "MY_KEY");
  CHECK(c.pipeline.parallelism == 2);
  CHECK(c.pipeline.max_attempts.at(Stage::answer) == 3);
  CHECK(c.pipeline.max_attempts.at(Stage::caption) == 5);
  CHECK(c.gateway.timeout_s == 4.0);
  CHECK(std::get<gateway::BackendModel>(c.gateway.backend).capacity == 2.0);
  CHECK(c.review.reject_policy == review::RejectPolicy::remove);
  CHECK(c.train_ratio == 0.8);

  const auto registry = cli::build_registry(c, 9);
  CHECK(registry.ids().size() == 3);
  const auto& val = std::get<cli::SimulatedProviderConfig>(c.providers[2]);
  CHECK(val.script.stage_behaviors.at("validate_caption").validation_pass_probability == 0.5);

  for (const char* bad : {R"({"train_ratio": 1.5})", R"({"providers": [{"id": "a"}, {"id": "a"}]})",
                          R"({"providers": [{"id": "x", "type": "carrier-pigeon"}]})",
                          R"({"gateway": {"timeout_s": 0}})", R"({"judge": {"repetitions": "three"}})", "[]"}) {
    CAPTURE(bad);
    try {
      cli::parse_config(json::parse(bad));
      FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::config_invalid);
    }
  }
}

TEST_CASE("shipped example config parses") {
  const auto c = cli::load_config(std::filesystem::path(FOUNDRY_SOURCE_DIR) / "configs" / "config.json");
  CHECK(c.providers.size() == 4);
  CHECK(c.pipeline.validator == "sim-validator");
  CHECK(c.judge.repetitions == 3);
  CHECK(std::get<gateway::BackendModel>(c.gateway.backend).s0 == 0.55);
}

TEST_CASE("generate, export, stats and sample end to end") {
  fixtures::TempDir dir;
  fixtures::make_images(dir / "images", 12);
  const auto records = (dir / "records").string();
  const auto out = (dir / "dataset").string();
  REQUIRE(run({"generate", "--images", (dir / "images").string(), "--records", records, "--seed", "5"}) == 0);
  CHECK(load_records(records).size() == 12);
  REQUIRE(run({"export", "--records", records, "--out", out, "--seed", "1"}) == 0);
  CHECK(std::filesystem::exists(dir / "dataset" / "questions_train.json"));
  CHECK(std::filesystem::exists(dir / "dataset" / "metadata_train.json"));
  REQUIRE(run({"stats", "--dataset", out}) == 0);
  const json stats = read_json_file(dir / "dataset" / "stats.json");
  CHECK(stats.contains("splits"));
  REQUIRE(run({"sample", "--dataset", out, "--seed", "3"}) == 0);
  const json sample = read_json_file(dir / "dataset" / "review_sample.json");
  CHECK(sample["sample_size"].get<std::size_t>() == sample["item_ids"].size());

  // Oracle predictions score perfectly on closed items.
  json preds = json::array();
  for (const auto& r : dataset::load_dataset(out))
    for (const auto& q : r.qa_items) preds.push_back({{"question_id", q.question_id}, {"text", *q.multiple_choice_answer}});
  write_json_file(dir / "preds.json", preds);
  REQUIRE(run({"evaluate", "--pred", (dir / "preds.json").string(), "--dataset", out, "--judge", "--out",
               (dir / "eval.json").string()}) == 0);
  const json report = read_json_file(dir / "eval.json");
  CHECK(report["aggregate"]["closed_accuracy"] == 1.0);
  CHECK(report["aggregate"].contains("rubric_means"));
}

TEST_CASE("identical seeds give identical outputs") {
  fixtures::TempDir dir;
  fixtures::make_images(dir / "images", 6);
  for (const char* sub : {"r1", "r2"})
    REQUIRE(run({"generate", "--images", (dir / "images").string(), "--records", (dir / sub).string(), "--seed", "8"}) == 0);
  for (const auto& e : std::filesystem::directory_iterator(dir / "r1"))
    CHECK(slurp(e.path()) == slurp(dir / "r2" / e.path().filename()));

  for (const char* sub : {"b1", "b2"})
    REQUIRE(run({"bench-cont", "--streams", "2", "--hz", "10", "--duration", "3", "--k", "1,3", "--virtual-time",
                 "--out", (dir / sub).string(), "--seed", "4"}) == 0);
  for (const char* f : {"bench_1.csv", "bench_3.csv", "sweep_summary.json"})
    CHECK(slurp(dir / "b1" / f) == slurp(dir / "b2" / f));

  fixtures::make_images(dir / "frames", 5);
  REQUIRE(run({"bench-seq", "--images", (dir / "frames").string(), "--out", (dir / "seq").string()}) == 0);
  CHECK(read_json_file(dir / "seq" / "bench_seq.json")["aggregates"]["completed"] == 5);
}
