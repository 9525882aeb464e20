#include "hop/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include "hop/rng.hpp"
#include "nlohmann/json.hpp"

namespace hop {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::uint64_t kSceneStream = 2;
constexpr std::uint64_t kQAStream = 3;

}  // namespace

DatasetItem generate_item(const GenConfig& cfg, int index) {
  const std::uint64_t item_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(index));
  DatasetItem item;
  item.scene = generate_scene(derive_seed(item_seed, kSceneStream), cfg.scene);
  const QAKind kind = static_cast<QAKind>(index % kNumQAKinds);
  item.qa = make_qa(item.scene, kind, derive_seed(item_seed, kQAStream));
  return item;
}

std::vector<DatasetItem> generate_dataset(const GenConfig& cfg) {
  if (cfg.count <= 0) throw std::runtime_error("generate_dataset: count must be positive");
  std::vector<DatasetItem> items;
  items.reserve(cfg.count);
  for (int i = 0; i < cfg.count; i++) items.push_back(generate_item(cfg, i));
  return items;
}

void save_dataset(const std::string& path, const std::vector<DatasetItem>& items) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  for (const auto& item : items) {
    Json rec;
    rec["v"] = 1;
    rec["seed"] = std::to_string(item.scene.seed);  // u64, kept as string
    rec["grid"] = item.scene.grid;
    rec["weather"] = item.scene.weather;
    rec["lighting"] = item.scene.lighting;
    Json insts = Json::array();
    for (const auto& inst : item.scene.instances)
      insts.push_back(Json{{"c", inst.cls}, {"a", inst.attribute}, {"cells", inst.cells}});
    rec["instances"] = insts;
    rec["qa"] = Json{{"kind", qa_kind_name(item.qa.kind)},
                     {"q", item.qa.question_ids},
                     {"answer", item.qa.answer},
                     {"a1", item.qa.arg1},
                     {"a2", item.qa.arg2}};
    out << rec.dump() << "\n";
  }
  if (!out) throw std::runtime_error("save_dataset: write failed for " + path);
}

std::vector<DatasetItem> load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::vector<DatasetItem> items;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty()) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("load_dataset: bad json at line " + std::to_string(lineno) +
                               ": " + e.what());
    }
    if (rec.value("v", 0) != 1)
      throw std::runtime_error("load_dataset: unsupported record version at line " +
                               std::to_string(lineno));
    DatasetItem item;
    item.scene.seed = std::stoull(rec.at("seed").get<std::string>());
    item.scene.grid = rec.at("grid").get<int>();
    item.scene.weather = rec.at("weather").get<int>();
    item.scene.lighting = rec.at("lighting").get<int>();
    for (const auto& j : rec.at("instances")) {
      Instance inst;
      inst.cls = j.at("c").get<int>();
      inst.attribute = j.at("a").get<int>();
      inst.cells = j.at("cells").get<std::vector<int>>();
      item.scene.instances.push_back(std::move(inst));
    }
    const auto& q = rec.at("qa");
    item.qa.kind = parse_qa_kind(q.at("kind").get<std::string>());
    item.qa.question_ids = q.at("q").get<std::vector<int>>();
    item.qa.answer = q.at("answer").get<int>();
    item.qa.arg1 = q.at("a1").get<int>();
    item.qa.arg2 = q.at("a2").get<int>();
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace hop
