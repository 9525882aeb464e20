#include "hop/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace hop {

const std::vector<std::string>& class_names() {
  static const std::vector<std::string> v = {"car", "cyclist", "pedestrian", "sign", "lane"};
  return v;
}

const std::vector<std::string>& weather_names() {
  static const std::vector<std::string> v = {"sunny", "rainy", "foggy"};
  return v;
}

const std::vector<std::string>& lighting_names() {
  static const std::vector<std::string> v = {"day", "night"};
  return v;
}

namespace {

int weighted_class(Rng& rng, const std::vector<double>& w) {
  double total = 0.0;
  for (double x : w) {
    if (x < 0.0) throw std::runtime_error("generate_scene: negative class weight");
    total += x;
  }
  if (total <= 0.0) throw std::runtime_error("generate_scene: class weights sum to zero");
  double u = rng.uniform() * total;
  for (int c = 0; c < static_cast<int>(w.size()); c++) {
    u -= w[c];
    if (u < 0.0) return c;
  }
  return static_cast<int>(w.size()) - 1;
}

std::vector<int> free_neighbors(const std::vector<int>& cells, const std::vector<char>& occ,
                                int grid) {
  std::set<int> out;
  for (int cell : cells) {
    const int r = cell / grid, c = cell % grid;
    const int cand[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
    for (auto& rc : cand) {
      if (rc[0] < 0 || rc[0] >= grid || rc[1] < 0 || rc[1] >= grid) continue;
      const int id = rc[0] * grid + rc[1];
      if (!occ[id]) out.insert(id);
    }
  }
  return {out.begin(), out.end()};
}

// Grows a connected blob from seed_cell. May come up short if it gets boxed in.
std::vector<int> grow_blob(Rng& rng, std::vector<char>& occ, int grid, int seed_cell, int size) {
  std::vector<int> cells = {seed_cell};
  occ[seed_cell] = 1;
  while (static_cast<int>(cells.size()) < size) {
    std::vector<int> frontier = free_neighbors(cells, occ, grid);
    if (frontier.empty()) break;
    const int pick = frontier[rng.uniform_int(0, static_cast<int>(frontier.size()) - 1)];
    occ[pick] = 1;
    cells.push_back(pick);
  }
  std::sort(cells.begin(), cells.end());
  return cells;
}

// Classes get soft horizontal bands so cell position carries a class prior.
int band_seed_cell(Rng& rng, const std::vector<char>& occ, int grid, int cls) {
  for (int attempt = 0; attempt < 64; attempt++) {
    int row;
    if (rng.uniform() < 0.7) {
      const double center = (cls + 0.5) * grid / static_cast<double>(kNumClasses);
      row = static_cast<int>(std::lround(center + rng.normal() * 2.5));
      row = std::clamp(row, 0, grid - 1);
    } else {
      row = rng.uniform_int(0, grid - 1);
    }
    const int col = rng.uniform_int(0, grid - 1);
    const int id = row * grid + col;
    if (!occ[id]) return id;
  }
  return -1;
}

// Seed cell touching an already placed blob, so the two blobs end up adjacent.
int touching_seed_cell(Rng& rng, const std::vector<char>& occ, int grid,
                       const std::vector<int>& anchor) {
  std::vector<int> frontier = free_neighbors(anchor, occ, grid);
  if (frontier.empty()) return -1;
  return frontier[rng.uniform_int(0, static_cast<int>(frontier.size()) - 1)];
}

}  // namespace

Scene generate_scene(std::uint64_t seed, const SceneConfig& cfg) {
  if (cfg.grid < 4) throw std::runtime_error("generate_scene: grid too small");
  if (static_cast<int>(cfg.class_weights.size()) != kNumClasses)
    throw std::runtime_error("generate_scene: class_weights must have one entry per class");
  Rng rng(derive_seed(seed, 0x5345u));
  Scene scene;
  scene.grid = cfg.grid;
  scene.seed = seed;
  scene.weather = rng.uniform_int(0, kNumWeather - 1);
  scene.lighting = rng.uniform_int(0, kNumLighting - 1);
  if (cfg.max_instances <= 0) return scene;

  std::vector<char> occ(cfg.grid * cfg.grid, 0);
  const bool cluster = rng.uniform() < cfg.cluster_prob;
  int want;
  std::vector<int> classes;
  if (cluster) {
    want = std::min(cfg.max_instances, 3 + rng.uniform_int(0, 4));
    const int cls = weighted_class(rng, cfg.class_weights);
    classes.assign(want, cls);
  } else {
    want = std::min(cfg.max_instances, 2 + rng.uniform_int(0, 4));
    for (int i = 0; i < want; i++) classes.push_back(weighted_class(rng, cfg.class_weights));
  }
  const bool pair_seed = !cluster && want >= 2 && rng.uniform() < cfg.pair_seed_prob;

  for (int i = 0; i < want; i++) {
    int seed_cell = -1;
    const bool attach = (cluster && i > 0) || (pair_seed && i == 1);
    if (attach && !scene.instances.empty())
      seed_cell = touching_seed_cell(rng, occ, cfg.grid, scene.instances.back().cells);
    if (seed_cell < 0) seed_cell = band_seed_cell(rng, occ, cfg.grid, classes[i]);
    if (seed_cell < 0) continue;  // grid packed tight, skip
    Instance inst;
    inst.cls = classes[i];
    inst.attribute = rng.uniform_int(0, 1);
    inst.cells = grow_blob(rng, occ, cfg.grid, seed_cell, cfg.instance_size);
    scene.instances.push_back(std::move(inst));
  }
  return scene;
}

int count_class(const Scene& scene, int cls) {
  int n = 0;
  for (const auto& inst : scene.instances) n += inst.cls == cls ? 1 : 0;
  return n;
}

bool class_present(const Scene& scene, int cls) { return count_class(scene, cls) > 0; }

bool instances_adjacent(const Instance& a, const Instance& b, int grid) {
  for (int ca : a.cells)
    for (int cb : b.cells) {
      const int dr = std::abs(ca / grid - cb / grid);
      const int dc = std::abs(ca % grid - cb % grid);
      if (dr + dc == 1) return true;
    }
  return false;
}

bool classes_adjacent(const Scene& scene, int c1, int c2) {
  const int n = static_cast<int>(scene.instances.size());
  for (int i = 0; i < n; i++)
    for (int j = i + 1; j < n; j++) {
      const auto& a = scene.instances[i];
      const auto& b = scene.instances[j];
      const bool match = (a.cls == c1 && b.cls == c2) || (a.cls == c2 && b.cls == c1);
      if (match && instances_adjacent(a, b, scene.grid)) return true;
    }
  return false;
}

std::vector<int> cell_owner(const Scene& scene) {
  std::vector<int> owner(scene.grid * scene.grid, -1);
  for (int i = 0; i < static_cast<int>(scene.instances.size()); i++)
    for (int cell : scene.instances[i].cells) owner[cell] = i;
  return owner;
}

void centroid(const Instance& inst, int grid, double* row, double* col) {
  double r = 0.0, c = 0.0;
  for (int cell : inst.cells) {
    r += cell / grid;
    c += cell % grid;
  }
  *row = r / inst.cells.size();
  *col = c / inst.cells.size();
}

}  // namespace hop
