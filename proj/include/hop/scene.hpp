#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hop/rng.hpp"

namespace hop {

// Symbolic driving scene on a square cell grid. Instances are small connected
// blobs of cells; everything downstream (tokens, teachers, QA) derives from
// this record plus the scene seed.

inline constexpr int kNumClasses = 5;
inline constexpr int kNumWeather = 3;
inline constexpr int kNumLighting = 2;
inline constexpr int kInstanceSlots = 8;  // identity slots, assigned in scan order

const std::vector<std::string>& class_names();     // car, cyclist, ...
const std::vector<std::string>& weather_names();   // sunny, rainy, foggy
const std::vector<std::string>& lighting_names();  // day, night

struct Instance {
  int cls = 0;
  int attribute = 0;            // 0 stopped, 1 moving
  std::vector<int> cells;       // row-major cell ids, sorted, connected, nonempty
};

struct Scene {
  int grid = 24;
  int weather = 0;
  int lighting = 0;
  std::uint64_t seed = 0;       // generation seed, kept for token streams
  std::vector<Instance> instances;
};

struct SceneConfig {
  int grid = 24;
  int max_instances = 7;
  int instance_size = 4;        // target cells per blob
  double cluster_prob = 0.35;   // one class repeated, blobs chained adjacently
  double pair_seed_prob = 0.6;  // spread mode: force one adjacent pair
  std::vector<double> class_weights = {1, 1, 1, 1, 1};
};

Scene generate_scene(std::uint64_t seed, const SceneConfig& cfg = {});

// Helpers shared by encoders, QA and tests.
int count_class(const Scene& scene, int cls);
bool class_present(const Scene& scene, int cls);
bool instances_adjacent(const Instance& a, const Instance& b, int grid);
// true iff some instance of c1 touches some instance of c2 (4-neighborhood)
bool classes_adjacent(const Scene& scene, int c1, int c2);
// cell id -> instance index, -1 for background
std::vector<int> cell_owner(const Scene& scene);
void centroid(const Instance& inst, int grid, double* row, double* col);

}  // namespace hop
