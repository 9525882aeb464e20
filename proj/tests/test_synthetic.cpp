#include <doctest.h>

#include <cmath>
#include <queue>
#include <set>
#include <vector>

#include "hop/encoders.hpp"
#include "hop/scene.hpp"

using namespace hop;

namespace {

bool connected(const std::vector<int>& cells, int grid) {
  if (cells.empty()) return false;
  std::set<int> want(cells.begin(), cells.end());
  std::set<int> seen;
  std::queue<int> q;
  q.push(cells[0]);
  seen.insert(cells[0]);
  while (!q.empty()) {
    const int cell = q.front();
    q.pop();
    const int r = cell / grid, c = cell % grid;
    const int cand[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
    for (auto& rc : cand) {
      if (rc[0] < 0 || rc[0] >= grid || rc[1] < 0 || rc[1] >= grid) continue;
      const int id = rc[0] * grid + rc[1];
      if (want.count(id) && !seen.count(id)) {
        seen.insert(id);
        q.push(id);
      }
    }
  }
  return seen.size() == want.size();
}

double row_dot(const Tensor& a, int i, const Tensor& b, int j) {
  double acc = 0.0;
  for (int k = 0; k < a.dim(1); k++) acc += a.at(i, k) * b.at(j, k);
  return acc;
}

double row_cosine(const Tensor& t, int i, int j) {
  const double ii = row_dot(t, i, t, i), jj = row_dot(t, j, t, j), ij = row_dot(t, i, t, j);
  return ij / std::sqrt(ii * jj);
}

bool same_scene(const Scene& a, const Scene& b) {
  if (a.grid != b.grid || a.weather != b.weather || a.lighting != b.lighting ||
      a.instances.size() != b.instances.size())
    return false;
  for (size_t i = 0; i < a.instances.size(); i++) {
    if (a.instances[i].cls != b.instances[i].cls ||
        a.instances[i].attribute != b.instances[i].attribute ||
        a.instances[i].cells != b.instances[i].cells)
      return false;
  }
  return true;
}

}  // namespace

TEST_CASE("scenes satisfy their structural invariants") {
  SceneConfig cfg;
  std::vector<int> class_seen(kNumClasses, 0);
  int scenes_checked = 0;
  for (uint64_t seed = 1; seed <= 220; seed++) {
    Scene s = generate_scene(seed, cfg);
    CHECK(s.grid == cfg.grid);
    CHECK(s.weather >= 0);
    CHECK(s.weather < kNumWeather);
    CHECK(s.lighting >= 0);
    CHECK(s.lighting < kNumLighting);
    CHECK(s.seed == seed);
    REQUIRE(!s.instances.empty());
    CHECK(static_cast<int>(s.instances.size()) <= cfg.max_instances);

    std::set<int> all_cells;
    for (const Instance& inst : s.instances) {
      CHECK(inst.cls >= 0);
      CHECK(inst.cls < kNumClasses);
      CHECK((inst.attribute == 0 || inst.attribute == 1));
      REQUIRE(!inst.cells.empty());
      CHECK(static_cast<int>(inst.cells.size()) <= cfg.instance_size);
      CHECK(std::is_sorted(inst.cells.begin(), inst.cells.end()));
      for (int cell : inst.cells) {
        CHECK(cell >= 0);
        CHECK(cell < s.grid * s.grid);
        CHECK(all_cells.insert(cell).second);  // no overlap across instances
      }
      CHECK(connected(inst.cells, s.grid));
      class_seen[inst.cls]++;
    }

    // helper views agree with the raw record
    const std::vector<int> owner = cell_owner(s);
    int owned = 0;
    for (size_t i = 0; i < s.instances.size(); i++)
      for (int cell : s.instances[i].cells) {
        CHECK(owner[cell] == static_cast<int>(i));
        owned++;
      }
    for (int cell = 0; cell < s.grid * s.grid; cell++)
      if (!all_cells.count(cell)) CHECK(owner[cell] == -1);
    CHECK(owned == static_cast<int>(all_cells.size()));

    for (int c = 0; c < kNumClasses; c++) {
      int n = 0;
      for (const Instance& inst : s.instances) n += inst.cls == c ? 1 : 0;
      CHECK(count_class(s, c) == n);
      CHECK(class_present(s, c) == (n > 0));
    }
    scenes_checked++;
  }
  CHECK(scenes_checked == 220);
  for (int c = 0; c < kNumClasses; c++) CHECK(class_seen[c] > 0);
}

TEST_CASE("scene generation is deterministic in the seed") {
  SceneConfig cfg;
  for (uint64_t seed : {3u, 17u, 99u}) {
    Scene a = generate_scene(seed, cfg);
    Scene b = generate_scene(seed, cfg);
    CHECK(same_scene(a, b));
  }
  CHECK_FALSE(same_scene(generate_scene(3, cfg), generate_scene(4, cfg)));
  SceneConfig bad = cfg;
  bad.grid = 3;
  CHECK_THROWS(generate_scene(1, bad));
  bad = cfg;
  bad.class_weights = {1, 1};
  CHECK_THROWS(generate_scene(1, bad));
}

TEST_CASE("adjacency helpers agree with geometry") {
  Instance a, b, c;
  a.cells = {0, 1};     // top-left corner pair
  b.cells = {2};        // touches cell 1
  c.cells = {12};       // one row down from cell 2 on a 10-grid
  CHECK(instances_adjacent(a, b, 10));
  CHECK(instances_adjacent(b, c, 10));
  CHECK_FALSE(instances_adjacent(a, c, 10));

  Scene s;
  s.grid = 10;
  a.cls = 0;
  b.cls = 2;
  c.cls = 2;
  s.instances = {a, b, c};
  CHECK(classes_adjacent(s, 0, 2));
  CHECK(classes_adjacent(s, 2, 0));
  CHECK(classes_adjacent(s, 2, 2));  // b and c touch
  CHECK_FALSE(classes_adjacent(s, 0, 1));

  double row = 0, col = 0;
  centroid(a, 10, &row, &col);
  CHECK(row == doctest::Approx(0.0));
  CHECK(col == doctest::Approx(0.5));
}

TEST_CASE("direction dictionaries are orthonormal and seed-stable") {
  Dictionaries d1 = make_dictionaries(7, 32, 48, 16);
  Dictionaries d2 = make_dictionaries(7, 32, 48, 16);
  Dictionaries d3 = make_dictionaries(8, 32, 48, 16);
  for (const Tensor* t : {&d1.base, &d1.aff, &d1.sem}) {
    for (int i = 0; i < t->dim(0); i++)
      for (int j = 0; j <= i; j++) {
        const double want = i == j ? 1.0 : 0.0;
        CHECK(row_dot(*t, i, *t, j) == doctest::Approx(want).epsilon(1e-9));
      }
  }
  CHECK(d1.base.shape == std::vector<int>{kBaseDirCount, 32});
  CHECK(d1.aff.shape == std::vector<int>{kAffDirCount, 48});
  CHECK(d1.sem.shape == std::vector<int>{kSemDirCount, 16});
  for (size_t i = 0; i < d1.base.numel(); i++) CHECK((*d1.base.data)[i] == (*d2.base.data)[i]);
  double diff = 0.0;
  for (size_t i = 0; i < d1.base.numel(); i++)
    diff = std::max(diff, std::fabs((*d1.base.data)[i] - (*d3.base.data)[i]));
  CHECK(diff > 1e-3);

  CHECK_THROWS(make_dictionaries(7, kBaseDirCount - 1, 48, 16));
  CHECK_THROWS(make_dictionaries(7, 32, kAffDirCount - 1, 16));
  CHECK_THROWS(make_dictionaries(7, 32, 48, kSemDirCount - 1));
}

TEST_CASE("base tokens: dropout rate, scramble locality, determinism") {
  Dictionaries dicts = make_dictionaries(5, 32, 48, 16);
  SceneConfig cfg;
  cfg.grid = 12;

  int instance_cells = 0, kept = 0;
  for (uint64_t seed = 1; seed <= 50; seed++) {
    Scene s = generate_scene(seed, cfg);
    DegradeConfig deg;  // scramble on, dropout 0.9
    VisualTokens vt = encode_base_tokens(s, dicts, deg);
    REQUIRE(vt.tokens.shape == std::vector<int>{144, 32});
    CHECK(vt.rows == 12);
    CHECK(vt.cols == 12);

    const std::vector<int> owner = cell_owner(s);
    for (int cell = 0; cell < 144; cell++) {
      if (owner[cell] < 0) continue;
      instance_cells++;
      const int cls = s.instances[owner[cell]].cls;
      if (row_dot(vt.tokens, cell, dicts.base, kBaseClass0 + cls) > 0.25) kept++;
    }
  }
  const double kept_frac = static_cast<double>(kept) / instance_cells;
  CHECK(instance_cells > 500);
  CHECK(kept_frac > 0.05);
  CHECK(kept_frac < 0.16);

  // dropout 0 keeps the class channel on every instance cell
  Scene s = generate_scene(9, cfg);
  DegradeConfig full;
  full.semantic_dropout = 0.0;
  VisualTokens clean = encode_base_tokens(s, dicts, full);
  {
    const std::vector<int> owner9 = cell_owner(s);
    double dot_sum = 0.0;
    int n = 0;
    for (int cell = 0; cell < 144; cell++) {
      if (owner9[cell] < 0) continue;
      const int cls = s.instances[owner9[cell]].cls;
      const double dot = row_dot(clean.tokens, cell, dicts.base, kBaseClass0 + cls);
      CHECK(dot > 0.1);
      dot_sum += dot;
      n++;
    }
    REQUIRE(n > 0);
    CHECK(dot_sum / n > 0.4);
  }

  // scrambling flips instance-cell content only; background rows are untouched
  double inst_diff = 0.0;
  for (uint64_t seed = 9; seed <= 13; seed++) {
    Scene sc = generate_scene(seed, cfg);
    VisualTokens on = encode_base_tokens(sc, dicts, full);
    DegradeConfig no_scramble = full;
    no_scramble.affinity_scramble = false;
    VisualTokens off = encode_base_tokens(sc, dicts, no_scramble);
    const std::vector<int> who = cell_owner(sc);
    for (int cell = 0; cell < 144; cell++) {
      double cell_diff = 0.0;
      for (int k = 0; k < 32; k++)
        cell_diff = std::max(cell_diff, std::fabs(on.tokens.at(cell, k) - off.tokens.at(cell, k)));
      if (who[cell] < 0)
        CHECK(cell_diff == 0.0);
      else
        inst_diff = std::max(inst_diff, cell_diff);
    }
  }
  CHECK(inst_diff > 0.1);

  VisualTokens again = encode_base_tokens(s, dicts, full);
  for (size_t i = 0; i < clean.tokens.numel(); i++)
    CHECK((*again.tokens.data)[i] == (*clean.tokens.data)[i]);

  DegradeConfig bad;
  bad.semantic_dropout = 1.5;
  CHECK_THROWS(encode_base_tokens(s, dicts, bad));
}

TEST_CASE("affinity teacher groups cells by instance") {
  Dictionaries dicts = make_dictionaries(5, 32, 48, 16);
  SceneConfig cfg;
  cfg.grid = 12;

  double within_sum = 0, cross_sum = 0;
  int within_n = 0, cross_n = 0;
  for (uint64_t seed = 1; seed <= 30; seed++) {
    Scene s = generate_scene(seed, cfg);
    Tensor aff = teacher_affinity_tokens(s, dicts);
    REQUIRE(aff.shape == std::vector<int>{144, 48});
    const std::vector<int> owner = cell_owner(s);
    for (int a = 0; a < 144; a++) {
      if (owner[a] < 0) continue;
      for (int b = a + 1; b < 144; b++) {
        if (owner[b] < 0) continue;
        const double cs = row_cosine(aff, a, b);
        if (owner[a] == owner[b]) {
          within_sum += cs;
          within_n++;
        } else if (s.instances[owner[a]].cls != s.instances[owner[b]].cls) {
          cross_sum += cs;
          cross_n++;
        }
      }
    }
    // background cells share the background direction
    double bg_sum = 0.0;
    int bg_n = 0;
    for (int cell = 0; cell < 144; cell++)
      if (owner[cell] < 0) {
        bg_sum += row_dot(aff, cell, dicts.aff, kAffBackground);
        bg_n++;
      }
    REQUIRE(bg_n > 0);
    CHECK(bg_sum / bg_n > 0.15);
    CHECK(bg_sum / bg_n < 0.35);
  }
  REQUIRE(within_n > 100);
  REQUIRE(cross_n > 100);
  const double within_mean = within_sum / within_n;
  const double cross_mean = cross_sum / cross_n;
  CHECK(within_mean > 0.9);
  CHECK(within_mean > cross_mean + 0.3);

  Scene s = generate_scene(4, cfg);
  Tensor a1 = teacher_affinity_tokens(s, dicts);
  Tensor a2 = teacher_affinity_tokens(s, dicts);
  for (size_t i = 0; i < a1.numel(); i++) CHECK((*a1.data)[i] == (*a2.data)[i]);
}

TEST_CASE("semantic teacher: real queries then polluted distractors") {
  Dictionaries dicts = make_dictionaries(5, 32, 48, 16);
  SceneConfig cfg;
  cfg.grid = 12;
  const int distractors = 6;

  int distractor_total = 0, polluted = 0, real_total = 0;
  double real_label_dot = 0.0, distractor_label_energy = 0.0;
  for (uint64_t seed = 1; seed <= 60; seed++) {
    Scene s = generate_scene(seed, cfg);
    SemanticHint h = teacher_semantic_queries(s, dicts, distractors);
    const int n = static_cast<int>(s.instances.size());
    REQUIRE(h.tokens.shape == std::vector<int>{n + distractors, 16});
    REQUIRE(h.labels.size() == static_cast<size_t>(n + distractors));
    REQUIRE(h.confidences.size() == static_cast<size_t>(n + distractors));
    for (int i = 0; i < n; i++) {
      CHECK(h.labels[i] == s.instances[i].cls);
      CHECK(h.confidences[i] > 0.65);
      real_label_dot += row_dot(h.tokens, i, dicts.sem, kSemLabel0 + s.instances[i].cls);
      real_total++;
    }
    for (int i = n; i < n + distractors; i++) {
      CHECK(h.confidences[i] < 0.35);
      CHECK(h.labels[i] >= 0);
      CHECK(h.labels[i] <= kNumClasses);
      distractor_total++;
      if (h.labels[i] < kNumClasses) polluted++;
      double label_energy = 0.0;
      for (int lbl = 0; lbl <= kNumClasses; lbl++)
        label_energy = std::max(label_energy,
                                std::fabs(row_dot(h.tokens, i, dicts.sem, kSemLabel0 + lbl)));
      distractor_label_energy += label_energy;
    }
  }
  const double pollution = static_cast<double>(polluted) / distractor_total;
  CHECK(pollution > 0.35);
  CHECK(pollution < 0.65);
  // the label channel is strong on real queries and absent on distractors,
  // whose labels live only in the metadata
  CHECK(real_label_dot / real_total > 0.45);
  CHECK(distractor_label_energy / distractor_total < 0.35);

  Scene s = generate_scene(2, cfg);
  SemanticHint h1 = teacher_semantic_queries(s, dicts, 3);
  SemanticHint h2 = teacher_semantic_queries(s, dicts, 3);
  CHECK(h1.labels == h2.labels);
  CHECK(h1.confidences == h2.confidences);
  for (size_t i = 0; i < h1.tokens.numel(); i++)
    CHECK((*h1.tokens.data)[i] == (*h2.tokens.data)[i]);
  CHECK_THROWS(teacher_semantic_queries(s, dicts, -1));
}

TEST_CASE("label embedding table lines up with the semantic dictionary") {
  Dictionaries dicts = make_dictionaries(5, 32, 48, 16);
  Tensor table = make_label_embed(dicts);
  REQUIRE(table.shape == std::vector<int>{kNumClasses + 1, 16});
  for (int lbl = 0; lbl <= kNumClasses; lbl++) {
    CHECK(row_dot(table, lbl, dicts.sem, kSemLabel0 + lbl) == doctest::Approx(0.5));
    CHECK(row_dot(table, lbl, dicts.sem, kSemTag) == doctest::Approx(0.4));
    for (int other = 0; other <= kNumClasses; other++)
      if (other != lbl)
        CHECK(std::fabs(row_dot(table, lbl, dicts.sem, kSemLabel0 + other)) < 1e-9);
  }
}
