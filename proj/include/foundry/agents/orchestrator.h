#pragma once

#include <filesystem>
#include <functional>
#include <mutex>
#include <vector>

#include "foundry/agents/agents.h"

namespace foundry::agents {

/// Serialized writer for finished records (records/<image_id>.json).
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path records_dir) : dir_(std::move(records_dir)) {}
  void put(const ImageRecord& record);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex mu_;
};

/// Chains caption -> questions -> answers with validation after each stage.
/// A failed verdict regenerates only that stage's artifact (answers per
/// question) up to the stage's max_attempts; exhaustion marks the record
/// failed with the stage (and question) instead of passing it through.
/// Already-passed artifacts on a partially processed record are kept.
ImageRecord run_generation(ImageRecord image, const AgentContext& ctx, std::size_t ordinal);

/// Runs per-image pipelines on up to config.parallelism threads; results are
/// returned in input order and written through `store` when given.
std::vector<ImageRecord> run_pipeline(std::vector<ImageRecord> images, const AgentContext& ctx,
                                      RecordStore* store = nullptr);

/// One pending record per image file (jpg/jpeg/png/webp) in `dir`, sorted by
/// file name; image_id is the file stem.
std::vector<ImageRecord> discover_images(const std::filesystem::path& dir);

}  // namespace foundry::agents
