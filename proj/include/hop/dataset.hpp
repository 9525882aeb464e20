#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hop/qa.hpp"
#include "hop/scene.hpp"

namespace hop {

// Line-delimited dataset of symbolic scenes plus one QA record each. Tokens
// and teacher outputs are regenerated from the stored scene seed, so files
// stay small and byte-identical across runs. Schema v1, documented in
// docs/formats.md.

struct DatasetItem {
  Scene scene;
  QAItem qa;
};

struct GenConfig {
  int count = 20000;
  std::uint64_t master_seed = 7;
  SceneConfig scene;
  // question kinds rotate round-robin by item index, keeping kinds balanced
};

DatasetItem generate_item(const GenConfig& cfg, int index);
std::vector<DatasetItem> generate_dataset(const GenConfig& cfg);

void save_dataset(const std::string& path, const std::vector<DatasetItem>& items);
std::vector<DatasetItem> load_dataset(const std::string& path);

}  // namespace hop
