#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <unistd.h>
#include <vector>

#include "foundry/agents/agents.h"
#include "foundry/core/rng.h"
#include "foundry/core/text.h"
#include "foundry/core/types.h"
#include "foundry/providers/simulated.h"

namespace fixtures {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("foundry_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

/// n tiny files named img_000.jpg, img_001.jpg, ...
inline std::vector<fs::path> make_images(const fs::path& dir, int n) {
  fs::create_directories(dir);
  std::vector<fs::path> out;
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "img_%03d.jpg", i);
    const auto p = dir / name;
    std::ofstream(p, std::ios::binary) << "\xff\xd8\xff\xe0" << "frame" << i;
    out.push_back(p);
  }
  return out;
}

/// A complete, structurally valid record with seeded content.
inline foundry::ImageRecord make_record(const std::string& image_id, foundry::Rng& rng) {
  using namespace foundry;
  ImageRecord r;
  r.image_id = image_id;
  r.file_path = "images/" + image_id + ".jpg";
  const std::vector<std::string> scenes{"A wet urban road with a cyclist near parked cars at dusk",
                                        "Heavy rain on a highway with glare from oncoming headlights",
                                        "A construction zone narrows the lane and a worker holds a sign",
                                        "Fog hides a pedestrian crossing near a school bus"};
  const std::string cap = scenes[rng.below(scenes.size())] + " " + std::to_string(rng.below(1000));
  r.caption = Caption{cap, count_words(cap), "sim-a", 0.7};
  r.trace.caption_attempts = 1;
  r.trace.verdicts.push_back({Stage::caption, 1, VerdictOutcome::pass, "ok", ""});
  r.trace.question_attempts = 1;
  r.trace.verdicts.push_back({Stage::question, 1, VerdictOutcome::pass, "ok", ""});

  const std::size_t n_closed = 2 + rng.below(2);
  for (std::size_t k = 0; k < kQuestionsPerImage; ++k) {
    QaItem q;
    q.question_id = image_id + "_q" + std::to_string(k + 1);
    const bool closed = k < n_closed;
    q.answer_mode = closed ? AnswerMode::closed : AnswerMode::open;
    if (closed) q.closed_type = kClosedTypes[rng.below(kClosedTypes.size())];
    q.difficulty = static_cast<Difficulty>(rng.below(3));
    q.expected_answer_type = closed ? (q.closed_type == ClosedType::counting ? ExpectedAnswerType::count
                                                                             : ExpectedAnswerType::yes_no_multiple_choice)
                                    : ExpectedAnswerType::analysis;
    q.question_text = closed ? "Is there a hazard number " + std::to_string(k) + " in view?"
                             : "How should the vehicle respond to hazard " + std::to_string(k) + "?";
    std::vector<std::string> texts;
    for (int a = 1; a <= static_cast<int>(kAnswersPerQuestion); ++a) {
      Answer ans;
      ans.answer_id = a;
      ans.text = closed ? (rng.bernoulli(0.8) ? "yes" : "no") : "slow down and keep distance " + std::to_string(rng.below(3));
      ans.generator_model = a <= 5 ? "sim-a" : "sim-b";
      ans.answer_type = std::string(to_string(q.expected_answer_type));
      texts.push_back(ans.text);
      q.answers.push_back(ans);
    }
    q.multiple_choice_answer = modal_answer(texts);
    r.trace.answer_attempts[q.question_id] = 1;
    r.trace.verdicts.push_back({Stage::answer, 1, VerdictOutcome::pass, "ok", q.question_id});
    r.qa_items.push_back(std::move(q));
  }
  r.status = RecordStatus::complete;
  return r;
}

inline std::vector<foundry::ImageRecord> make_records(int n, std::uint64_t seed, const std::string& prefix = "img") {
  foundry::Rng rng(seed);
  std::vector<foundry::ImageRecord> out;
  for (int i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "%s_%03d", prefix.c_str(), i);
    out.push_back(make_record(id, rng));
  }
  return out;
}

/// Fixed record set behind the checked-in golden export files.
inline std::vector<foundry::ImageRecord> golden_records() {
  auto recs = make_records(3, 21, "gold");
  recs[0].split = foundry::Split::train;
  recs[1].split = foundry::Split::train;
  recs[2].split = foundry::Split::test;
  return recs;
}

/// Registry with generators sim-a, sim-b and validator sim-v, plus a context
/// whose retries never sleep.
struct SimSetup {
  foundry::providers::ProviderRegistry registry;
  std::shared_ptr<foundry::providers::SimulatedProvider> a, b, v;
  foundry::agents::AgentContext ctx;

  explicit SimSetup(std::uint64_t seed, foundry::providers::SimulatedProviderScript validator = {},
                    foundry::providers::SimulatedProviderScript gen = {}) {
    using namespace foundry::providers;
    auto ga = gen, gb = gen;
    ga.seed = seed * 3 + 1;
    gb.seed = seed * 3 + 2;
    if (validator.seed == 0) validator.seed = seed * 3 + 3;
    a = std::make_shared<SimulatedProvider>("sim-a", ga);
    b = std::make_shared<SimulatedProvider>("sim-b", gb);
    v = std::make_shared<SimulatedProvider>("sim-v", validator);
    registry.add(a);
    registry.add(b);
    registry.add(v);
    ctx.registry = &registry;
    ctx.config.providers = {"sim-a", "sim-b"};
    ctx.config.validator = "sim-v";
    ctx.config.seed = seed;
    ctx.sleep = [](Seconds) {};
  }
  SimSetup(const SimSetup&) = delete;
};

}  // namespace fixtures
