#include "foundry/cli/commands.h"

#include <algorithm>
#include <csignal>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "foundry/agents/orchestrator.h"
#include "foundry/cli/config.h"
#include "foundry/cli/log.h"
#include "foundry/core/error.h"
#include "foundry/core/serialize.h"
#include "foundry/dataset/formats.h"
#include "foundry/dataset/sampling.h"
#include "foundry/dataset/split.h"
#include "foundry/dataset/stats.h"
#include "foundry/eval/evaluate.h"
#include "foundry/gateway/bench.h"
#include "foundry/review/http_api.h"
#include "foundry/review/review_service.h"

namespace foundry::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kCommands{"generate", "export",   "stats",     "sample",
                                         "serve-review", "evaluate", "bench-seq", "bench-cont"};

struct Globals {
  std::string config_path;
  std::string log_level = "info";
};

RootConfig resolve_config(const Globals& g) {
  return g.config_path.empty() ? default_config() : load_config(g.config_path);
}

std::optional<Split> parse_split(const std::string& s) {
  if (s.empty() || s == "all") return std::nullopt;
  auto v = parse_enum<Split>(s);
  if (!v) throw Error(ErrorCode::invalid_argument, "unknown split '" + s + "'");
  return v;
}

std::vector<fs::path> image_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& r : agents::discover_images(dir)) out.push_back(r.file_path);
  return out;
}

std::vector<ImageRecord> load_any(const std::string& dataset_dir, const std::string& records_dir,
                                  const std::string& split) {
  if (!dataset_dir.empty()) return dataset::load_dataset(dataset_dir, parse_split(split));
  if (!records_dir.empty()) return load_records(records_dir);
  throw Error(ErrorCode::invalid_argument, "pass --dataset or --records");
}

std::unique_ptr<gateway::Backend> make_backend(const RootConfig& cfg, std::optional<std::uint64_t> seed,
                                               bool virtual_time) {
  if (const auto* m = std::get_if<gateway::BackendModel>(&cfg.gateway.backend)) {
    auto model = *m;
    if (seed) model.seed = *seed;
    return std::make_unique<gateway::SimulatedBackend>(model, virtual_time);
  }
  if (virtual_time) throw Error(ErrorCode::invalid_argument, "--virtual-time needs the simulated gateway backend");
  const auto& h = std::get<HttpBackendConfig>(cfg.gateway.backend);
  return std::make_unique<gateway::HttpBackend>(h.base_url, h.path, h.timeout_s);
}

std::vector<int> parse_caps(const std::string& list) {
  std::vector<int> out;
  std::stringstream ss(list);
  for (std::string part; std::getline(ss, part, ',');) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(part, &used);
      if (used != part.size() || k < 1) throw std::invalid_argument(part);
      out.push_back(k);
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_argument, "--k expects positive integers, got '" + part + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::invalid_argument, "--k is empty");
  return out;
}

std::optional<std::string> command_word(const std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& a = args[i];
    if (a == "--config" || a == "--log-level") {
      ++i;
      continue;
    }
    if (!a.empty() && a[0] == '-') continue;
    return a;
  }
  return std::nullopt;
}

void print_error(std::string_view code, const std::string& message) {
  json line{{"level", "error"}, {"event", "failed"}, {"error", code}, {"message", message}};
  std::cerr << line.dump() << std::endl;
}

volatile std::sig_atomic_t g_stop = 0;

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"foundry: SOTIF VQA dataset generation, evaluation and serving benchmarks", "foundry"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "JSON config file");
  app.add_option("--log-level", g.log_level, "debug|info|warn|error");

  std::function<void()> action;

  // generate
  auto* gen = app.add_subcommand("generate", "Run the multi-agent pipeline over an image directory");
  std::string gen_images, gen_records;
  std::optional<std::uint64_t> gen_seed;
  std::size_t gen_limit = 0;
  bool gen_force = false;
  gen->add_option("--images", gen_images, "Image directory")->required();
  gen->add_option("--records", gen_records, "Record directory (default from config)");
  gen->add_option("--seed", gen_seed, "Seed for question plans and simulated providers");
  gen->add_option("--limit", gen_limit, "Process at most this many images");
  gen->add_flag("--force", gen_force, "Regenerate records that already exist");
  gen->callback([&] {
    action = [&] {
      auto cfg = resolve_config(g);
      if (gen_seed) cfg.pipeline.seed = *gen_seed;
      const fs::path records_dir = gen_records.empty() ? cfg.paths.records_dir : fs::path(gen_records);
      const auto registry = build_registry(cfg, gen_seed);
      agents::AgentContext ctx{&registry, cfg.pipeline, agents::PromptLibrary::load(cfg.paths.prompts_dir),
                               cfg.retry, {}};
      agents::check_pipeline_config(cfg.pipeline, registry);

      auto images = agents::discover_images(gen_images);
      if (gen_limit > 0 && images.size() > gen_limit) images.resize(gen_limit);
      std::vector<ImageRecord> todo;
      std::size_t skipped = 0;
      for (auto& img : images) {
        const auto existing = record_path(records_dir, img.image_id);
        if (!gen_force && fs::exists(existing)) {
          auto rec = load_record(existing);
          if (rec.status != RecordStatus::pending) {
            ++skipped;
            continue;
          }
          img = std::move(rec);
        }
        todo.push_back(std::move(img));
      }
      log_info("generate.start", {{"images", todo.size()}, {"skipped", skipped}, {"records_dir", records_dir.string()}});
      agents::RecordStore store(records_dir);
      const auto done = agents::run_pipeline(std::move(todo), ctx, &store);
      std::size_t complete = 0, failed = 0;
      for (const auto& r : done) (r.status == RecordStatus::complete ? complete : failed) += 1;
      log_info("generate.done", {{"complete", complete}, {"failed", failed}});
    };
  });

  // export
  auto* exp = app.add_subcommand("export", "Split complete records and write COCO/VQAv2 files");
  std::string exp_records, exp_out;
  std::optional<double> exp_ratio;
  std::uint64_t exp_seed = 0;
  exp->add_option("--records", exp_records, "Record directory (default from config)");
  exp->add_option("--out", exp_out, "Dataset output directory (default from config)");
  exp->add_option("--train-ratio", exp_ratio, "Train fraction in (0,1)");
  exp->add_option("--seed", exp_seed, "Split seed");
  exp->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      auto records = load_records(exp_records.empty() ? cfg.paths.records_dir : fs::path(exp_records));
      const auto total = records.size();
      std::erase_if(records, [](const ImageRecord& r) { return r.status != RecordStatus::complete; });
      const auto split = dataset::split_records(records, exp_ratio.value_or(cfg.train_ratio), exp_seed);
      const fs::path out = exp_out.empty() ? cfg.paths.output_dir : fs::path(exp_out);
      dataset::write_dataset(records, out);
      log_info("export.done", {{"records", total},
                               {"exported", records.size()},
                               {"train", split.train.size()},
                               {"test", split.test.size()},
                               {"out", out.string()}});
    };
  });

  // stats
  auto* st = app.add_subcommand("stats", "Write stats.json for a dataset or record directory");
  std::string st_dataset, st_records, st_out;
  st->add_option("--dataset", st_dataset, "Exported dataset directory");
  st->add_option("--records", st_records, "Record directory");
  st->add_option("--out", st_out, "Output file (default <dir>/stats.json)");
  st->callback([&] {
    action = [&] {
      resolve_config(g);
      const auto records = load_any(st_dataset, st_records, "");
      const fs::path out = !st_out.empty() ? fs::path(st_out)
                                           : fs::path(st_dataset.empty() ? st_records : st_dataset) / "stats.json";
      write_json_file(out, dataset::to_json(dataset::compute_stats(records)));
      log_info("stats.done", {{"records", records.size()}, {"out", out.string()}});
    };
  });

  // sample
  auto* smp = app.add_subcommand("sample", "Draw a Cochran-sized review sample");
  std::string smp_dataset, smp_records, smp_out, smp_population = "items", smp_split;
  double smp_conf = 0.95, smp_margin = 0.04, smp_p = 0.5;
  std::uint64_t smp_seed = 0;
  smp->add_option("--dataset", smp_dataset, "Exported dataset directory");
  smp->add_option("--records", smp_records, "Record directory");
  smp->add_option("--split", smp_split, "train|test|all");
  smp->add_option("--population", smp_population, "captions|questions|answers|items (captions+questions)|all")
      ->check(CLI::IsMember({"captions", "questions", "answers", "items", "all"}));
  smp->add_option("--confidence", smp_conf);
  smp->add_option("--margin", smp_margin);
  smp->add_option("--proportion", smp_p);
  smp->add_option("--seed", smp_seed);
  smp->add_option("--out", smp_out, "Output file (default <dir>/review_sample.json)");
  smp->callback([&] {
    action = [&] {
      resolve_config(g);
      const auto records = load_any(smp_dataset, smp_records, smp_split);
      std::vector<std::string> ids;
      for (const auto& r : records) {
        const bool caps = smp_population != "questions" && smp_population != "answers";
        const bool qs = smp_population == "questions" || smp_population == "items" || smp_population == "all";
        const bool ans = smp_population == "answers" || smp_population == "all";
        if (caps && r.caption) ids.push_back(r.image_id + ":caption");
        for (const auto& q : r.qa_items) {
          if (qs) ids.push_back(q.question_id);
          if (ans)
            for (const auto& a : q.answers) ids.push_back(q.question_id + ":a" + std::to_string(a.answer_id));
        }
      }
      const auto sample = dataset::sample_for_review(ids, smp_conf, smp_margin, smp_p, smp_seed);
      const fs::path out = !smp_out.empty() ? fs::path(smp_out)
                                            : fs::path(smp_dataset.empty() ? smp_records : smp_dataset) / "review_sample.json";
      write_json_file(out, dataset::to_json(sample));
      log_info("sample.done", {{"population", sample.population_size},
                               {"sample_size", sample.sample_size},
                               {"clamped", sample.clamped},
                               {"out", out.string()}});
    };
  });

  // serve-review
  auto* srv = app.add_subcommand("serve-review", "Serve the review REST API");
  std::string srv_dataset, srv_records, srv_host, srv_log;
  int srv_port = 0;
  srv->add_option("--dataset", srv_dataset, "Exported dataset directory");
  srv->add_option("--records", srv_records, "Record directory (edits are written back)");
  srv->add_option("--host", srv_host);
  srv->add_option("--port", srv_port);
  srv->add_option("--log", srv_log, "Append-only verdict log");
  srv->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      review::ReviewConfig rc;
      rc.reject_policy = cfg.review.reject_policy;
      rc.log_path = srv_log.empty() ? cfg.review.log_path : std::optional<fs::path>(srv_log);
      if (!srv_records.empty()) rc.records_dir = srv_records;
      review::ReviewService service(load_any(srv_dataset, srv_records, ""), rc);
      httplib::Server server;
      review::install_routes(server, service);
      const std::string host = srv_host.empty() ? cfg.review.host : srv_host;
      const int port = srv_port > 0 ? srv_port : cfg.review.port;
      std::signal(SIGINT, [](int) { g_stop = 1; });
      std::signal(SIGTERM, [](int) { g_stop = 1; });
      std::thread watcher([&] {
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        server.stop();
      });
      log_info("serve-review.listening", {{"host", host}, {"port", port}});
      const bool ok = server.listen(host, port);
      g_stop = 1;
      watcher.join();
      if (!ok) throw Error(ErrorCode::io_error, "cannot listen on " + host + ":" + std::to_string(port));
    };
  });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "Score predictions against a dataset");
  std::string ev_pred, ev_dataset, ev_split, ev_out = "eval_report.json";
  bool ev_judge = false;
  std::optional<std::uint64_t> ev_seed;
  ev->add_option("--pred", ev_pred, "Predictions JSON")->required();
  ev->add_option("--dataset", ev_dataset, "Exported dataset directory")->required();
  ev->add_option("--split", ev_split, "train|test|all");
  ev->add_flag("--judge", ev_judge, "Score open-ended answers with the judge provider");
  ev->add_option("--seed", ev_seed, "Seed for simulated judge providers");
  ev->add_option("--out", ev_out);
  ev->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      const auto records = dataset::load_dataset(ev_dataset, parse_split(ev_split));
      const auto preds = eval::parse_predictions(read_json_file(ev_pred), records);
      const auto registry = build_registry(cfg, ev_seed);
      eval::EvalOptions opts;
      opts.judge = ev_judge;
      opts.judge_ctx = {&registry, cfg.judge, agents::PromptLibrary::load(cfg.paths.prompts_dir), cfg.retry, {}};
      if (ev_judge && !registry.contains(cfg.judge.provider))
        throw Error(ErrorCode::config_invalid, "judge provider '" + cfg.judge.provider + "' is not configured");
      const auto report = eval::evaluate_dataset(records, preds, opts);
      write_json_file(ev_out, eval::to_json(report));
      log_info("evaluate.done", {{"closed", report.n_closed},
                                 {"open", report.n_open},
                                 {"captions", report.n_captions},
                                 {"out", ev_out}});
    };
  });

  // bench-seq
  auto* bs = app.add_subcommand("bench-seq", "Sequential per-image latency benchmark");
  std::string bs_images, bs_out = ".", bs_prompt = "Describe the driving scene.";
  bool bs_wall = false;
  std::optional<std::uint64_t> bs_seed;
  bs->add_option("--images", bs_images, "Image directory")->required();
  bs->add_option("--prompt", bs_prompt);
  bs->add_option("--out", bs_out, "Output directory for bench_seq.csv/json");
  bs->add_flag("--wall-clock", bs_wall, "Sleep for simulated service times instead of using virtual time");
  bs->add_option("--seed", bs_seed, "Simulated backend jitter seed");
  bs->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      const bool simulated = std::holds_alternative<gateway::BackendModel>(cfg.gateway.backend);
      auto backend = make_backend(cfg, bs_seed, simulated && !bs_wall);
      const auto report = gateway::run_sequential_bench(image_files(bs_images), bs_prompt, *backend);
      fs::create_directories(bs_out);
      write_text_file(fs::path(bs_out) / "bench_seq.csv", gateway::to_csv(report.records));
      write_json_file(fs::path(bs_out) / "bench_seq.json", gateway::to_json(report));
      log_info("bench-seq.done", gateway::to_json(report.aggregates));
    };
  });

  // bench-cont
  auto* bc = app.add_subcommand("bench-cont", "Continuous multi-stream benchmark with a concurrency sweep");
  int bc_streams = 4;
  double bc_hz = 30.0, bc_duration = 60.0;
  std::optional<double> bc_timeout;
  std::string bc_caps = "1,3,5,10,20,30", bc_out = ".", bc_frames;
  bool bc_virtual = false;
  std::optional<std::uint64_t> bc_seed;
  bc->add_option("--streams", bc_streams)->check(CLI::PositiveNumber);
  bc->add_option("--hz", bc_hz)->check(CLI::PositiveNumber);
  bc->add_option("--duration", bc_duration, "Seconds of stream replay")->check(CLI::NonNegativeNumber);
  bc->add_option("--timeout", bc_timeout, "Drop requests older than this many seconds");
  bc->add_option("--k", bc_caps, "Comma-separated concurrency caps");
  bc->add_option("--frames", bc_frames, "Image directory replayed as frames");
  bc->add_option("--out", bc_out, "Output directory for bench_<K>.csv and sweep_summary.json");
  bc->add_flag("--virtual-time", bc_virtual, "Run on a simulated clock");
  bc->add_option("--seed", bc_seed, "Simulated backend jitter seed");
  bc->callback([&] {
    action = [&] {
      const auto cfg = resolve_config(g);
      auto backend = make_backend(cfg, bc_seed, bc_virtual);
      gateway::ContinuousOptions opts;
      opts.streams = {bc_streams, bc_hz, bc_duration};
      opts.gateway.timeout_s = bc_timeout.value_or(cfg.gateway.timeout_s);
      opts.virtual_time = bc_virtual;
      if (!bc_frames.empty()) opts.frames = image_files(bc_frames);
      const auto caps = parse_caps(bc_caps);
      fs::create_directories(bc_out);
      std::vector<gateway::BenchReport> reports;
      for (int k : caps) {
        opts.gateway.concurrency_cap = k;
        reports.push_back(gateway::run_continuous_bench(opts, *backend));
        const auto& r = reports.back();
        write_text_file(fs::path(bc_out) / ("bench_" + std::to_string(k) + ".csv"), gateway::to_csv(r.records));
        auto line = gateway::to_json(r.aggregates);
        line["k"] = k;
        log_info("bench-cont.k", line);
      }
      json summary = gateway::sweep_summary(reports);
      summary["config"] = {{"streams", bc_streams},   {"hz", bc_hz},
                           {"duration_s", bc_duration}, {"timeout_s", opts.gateway.timeout_s},
                           {"virtual_time", bc_virtual}};
      write_json_file(fs::path(bc_out) / "sweep_summary.json", summary);
    };
  });

  const auto word = command_word(args);
  if (word && std::find(kCommands.begin(), kCommands.end(), *word) == kCommands.end()) {
    std::cerr << app.help() << std::endl;
    print_error(to_string(ErrorCode::unknown_command), "unknown command '" + *word + "'");
    return 2;
  }

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << std::endl;
    print_error(word ? "InvalidArgument" : to_string(ErrorCode::unknown_command), e.what());
    return 2;
  }

  try {
    set_log_level(parse_log_level(g.log_level));
    if (action) action();
    return 0;
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("Internal", e.what());
    return 1;
  }
}

}  // namespace foundry::cli
