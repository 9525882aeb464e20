#include "hop/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hop/rng.hpp"

namespace hop {

namespace {

// rng streams hanging off the scene seed
constexpr std::uint64_t kEncStream = 0x454e43u;
constexpr std::uint64_t kScrambleStream = 0x534352u;
constexpr std::uint64_t kAffStream = 0x414646u;
constexpr std::uint64_t kSemStream = 0x53454du;
constexpr std::uint64_t kDictStream = 0x44494354u;

// construction amplitudes; tuned against the probe suite, then frozen
constexpr double kGlobalAmp = 0.5;
constexpr double kBaseClassAmp = 0.5;
constexpr double kBaseSlotAmp = 0.4;
constexpr double kBaseBackgroundAmp = 0.25;
constexpr double kTextureFloor = 0.7;
constexpr double kTextureSpread = 0.5;
constexpr double kBaseNoise = 0.1;

constexpr double kAffClassAmp = 0.25;
constexpr double kAffCountJitter = 0.45;  // per-instance scale jitter, clamped
constexpr double kAffSlotAmp = 0.05;
constexpr double kAffPairAmp = 0.04;
constexpr double kAffPairJitter = 0.5;
constexpr double kAffNoise = 0.004;  // per dim

constexpr double kSemLabelAmp = 0.6;
constexpr double kSemPosAmp = 0.3;
constexpr double kSemNoise = 0.15;
constexpr double kSemPollution = 0.5;  // distractor label: real class vs background
constexpr double kLabelEmbedAmp = 0.5;
constexpr double kLabelTagAmp = 0.4;

Tensor orthonormal_rows(int n, int d, Rng& rng) {
  if (n > d) throw std::runtime_error("orthonormal_rows: more rows than dims");
  Tensor m = randn({n, d}, rng, 1.0);
  for (int i = 0; i < n; i++) {
    for (int pass = 0; pass < 2; pass++)  // two Gram-Schmidt passes for stability
      for (int j = 0; j < i; j++) {
        double dot = 0.0;
        for (int k = 0; k < d; k++) dot += m.at(i, k) * m.at(j, k);
        for (int k = 0; k < d; k++) m.at(i, k) -= dot * m.at(j, k);
      }
    double norm = 0.0;
    for (int k = 0; k < d; k++) norm += m.at(i, k) * m.at(i, k);
    norm = std::sqrt(norm);
    if (norm < 1e-8) throw std::runtime_error("orthonormal_rows: degenerate row");
    for (int k = 0; k < d; k++) m.at(i, k) /= norm;
  }
  return m;
}

void add_dir(Tensor& tokens, int row, const Tensor& dict, int dir, double amp) {
  const int d = tokens.dim(1);
  for (int k = 0; k < d; k++) tokens.at(row, k) += amp * dict.at(dir, k);
}

}  // namespace

Dictionaries make_dictionaries(std::uint64_t master_seed, int d, int d_aff, int d_sem) {
  if (d < kBaseDirCount) throw std::runtime_error("make_dictionaries: d too small for base dirs");
  if (d_aff < kAffDirCount)
    throw std::runtime_error("make_dictionaries: d_aff too small for affinity dirs");
  if (d_sem < kSemDirCount)
    throw std::runtime_error("make_dictionaries: d_sem too small for semantic dirs");
  Rng rng(derive_seed(master_seed, kDictStream));
  Dictionaries dicts;
  dicts.base = orthonormal_rows(kBaseDirCount, d, rng);
  dicts.aff = orthonormal_rows(kAffDirCount, d_aff, rng);
  dicts.sem = orthonormal_rows(kSemDirCount, d_sem, rng);
  return dicts;
}

VisualTokens encode_base_tokens(const Scene& scene, const Dictionaries& dicts,
                                const DegradeConfig& degrade) {
  if (degrade.semantic_dropout < 0.0 || degrade.semantic_dropout > 1.0)
    throw std::runtime_error("encode_base_tokens: semantic_dropout outside [0,1]");
  const int grid = scene.grid;
  const int cells = grid * grid;
  const int d = dicts.base.dim(1);
  Tensor tokens = zeros({cells, d});

  // block sign pattern, drawn whether or not scrambling is on so the rest of
  // the randomness lines up across degrade settings
  const int blocks = (grid + 2) / 3;
  std::vector<double> block_sign(blocks * blocks);
  {
    Rng rng(derive_seed(scene.seed, kScrambleStream));
    for (auto& s : block_sign) s = rng.uniform_int(0, 1) == 0 ? -1.0 : 1.0;
  }

  const std::vector<int> owner = cell_owner(scene);
  Rng rng(derive_seed(scene.seed, kEncStream));
  for (int cell = 0; cell < cells; cell++) {
    add_dir(tokens, cell, dicts.base, kBaseWeather0 + scene.weather, kGlobalAmp);
    add_dir(tokens, cell, dicts.base, kBaseLighting0 + scene.lighting, kGlobalAmp);
    const int inst = owner[cell];
    if (inst < 0) {
      add_dir(tokens, cell, dicts.base, kBaseBackground, kBaseBackgroundAmp);
    } else {
      const int cls = scene.instances[inst].cls;
      const double drop_u = rng.uniform();
      const double tex_sign = rng.uniform_int(0, 1) == 0 ? -1.0 : 1.0;
      const double tex_mag = kTextureFloor + kTextureSpread * std::fabs(rng.normal());
      if (drop_u >= degrade.semantic_dropout)
        add_dir(tokens, cell, dicts.base, kBaseClass0 + cls, kBaseClassAmp);
      double slot_amp = kBaseSlotAmp;
      if (degrade.affinity_scramble) {
        const int block = (cell / grid / 3) * blocks + (cell % grid) / 3;
        slot_amp *= block_sign[block];
      }
      add_dir(tokens, cell, dicts.base, kBaseSlot0 + inst % kInstanceSlots, slot_amp);
      add_dir(tokens, cell, dicts.base, kBaseTexture0 + cls, tex_sign * tex_mag);
    }
    for (int k = 0; k < d; k++) tokens.at(cell, k) += kBaseNoise * rng.normal();
  }
  check_finite(tokens, "encode_base_tokens");
  return {tokens, grid, grid};
}

Tensor teacher_affinity_tokens(const Scene& scene, const Dictionaries& dicts) {
  const int grid = scene.grid;
  const int cells = grid * grid;
  const int d_aff = dicts.aff.dim(1);
  const int n_inst = static_cast<int>(scene.instances.size());
  Tensor tokens = zeros({cells, d_aff});

  Rng rng(derive_seed(scene.seed, kAffStream));
  std::vector<double> jitter(n_inst);
  for (int i = 0; i < n_inst; i++)
    jitter[i] = std::clamp(kAffCountJitter * rng.normal(), -0.7, 0.7);

  // instance-level adjacency, one jittered pair amplitude per touching pair
  struct PairTerm {
    int a, b;
    double amp;
  };
  std::vector<PairTerm> pairs;
  for (int i = 0; i < n_inst; i++)
    for (int j = i + 1; j < n_inst; j++)
      if (instances_adjacent(scene.instances[i], scene.instances[j], grid))
        pairs.push_back({i, j, kAffPairAmp * (1.0 + std::clamp(kAffPairJitter * rng.normal(),
                                                               -0.9, 0.9))});

  const std::vector<int> owner = cell_owner(scene);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int cell = 0; cell < cells; cell++) {
    const int inst = owner[cell];
    if (inst < 0) {
      add_dir(tokens, cell, dicts.aff, kAffBackground, kAffClassAmp);
    } else {
      const int cls = scene.instances[inst].cls;
      add_dir(tokens, cell, dicts.aff, kAffClass0 + cls, kAffClassAmp * (1.0 + jitter[inst]));
      add_dir(tokens, cell, dicts.aff, kAffSlot0 + inst % kInstanceSlots, kAffSlotAmp);
      for (const auto& p : pairs) {
        if (p.a != inst && p.b != inst) continue;
        const int ca = scene.instances[p.a].cls;
        const int cb = scene.instances[p.b].cls;
        add_dir(tokens, cell, dicts.aff, kAffPair0 + ca, p.amp * inv_sqrt2);
        add_dir(tokens, cell, dicts.aff, kAffPair0 + cb, p.amp * inv_sqrt2);
      }
    }
    for (int k = 0; k < d_aff; k++) tokens.at(cell, k) += kAffNoise * rng.normal();
  }
  check_finite(tokens, "teacher_affinity_tokens");
  return tokens;
}

SemanticHint teacher_semantic_queries(const Scene& scene, const Dictionaries& dicts,
                                      int num_distractors) {
  if (num_distractors < 0)
    throw std::runtime_error("teacher_semantic_queries: negative distractor count");
  const int d_sem = dicts.sem.dim(1);
  const int n_inst = static_cast<int>(scene.instances.size());
  const int total = n_inst + num_distractors;
  Tensor queries = zeros({total, d_sem});
  SemanticHint hint;
  hint.labels.resize(total);
  hint.confidences.resize(total);

  Rng rng(derive_seed(scene.seed, kSemStream));
  for (int i = 0; i < n_inst; i++) {
    const auto& inst = scene.instances[i];
    add_dir(queries, i, dicts.sem, kSemLabel0 + inst.cls, kSemLabelAmp);
    double row, col;
    centroid(inst, scene.grid, &row, &col);
    const double px = 2.0 * col / (scene.grid - 1) - 1.0;
    const double py = 2.0 * row / (scene.grid - 1) - 1.0;
    add_dir(queries, i, dicts.sem, kSemPosX, kSemPosAmp * px);
    add_dir(queries, i, dicts.sem, kSemPosY, kSemPosAmp * py);
    for (int k = 0; k < d_sem; k++) queries.at(i, k) += kSemNoise * rng.normal();
    hint.labels[i] = inst.cls;
    hint.confidences[i] = 0.7 + 0.28 * rng.uniform();
  }
  for (int i = n_inst; i < total; i++) {
    add_dir(queries, i, dicts.sem, kSemPosX, kSemPosAmp * (2.0 * rng.uniform() - 1.0));
    add_dir(queries, i, dicts.sem, kSemPosY, kSemPosAmp * (2.0 * rng.uniform() - 1.0));
    for (int k = 0; k < d_sem; k++) queries.at(i, k) += kSemNoise * rng.normal();
    const bool polluted = rng.uniform() < kSemPollution;
    hint.labels[i] = polluted ? rng.uniform_int(0, kNumClasses - 1) : kNumClasses;
    hint.confidences[i] = 0.05 + 0.25 * rng.uniform();
  }
  check_finite(queries, "teacher_semantic_queries");
  hint.tokens = queries;
  return hint;
}

Tensor make_label_embed(const Dictionaries& dicts) {
  const int d_sem = dicts.sem.dim(1);
  Tensor table = zeros({kNumClasses + 1, d_sem});
  for (int lbl = 0; lbl <= kNumClasses; lbl++) {
    add_dir(table, lbl, dicts.sem, kSemLabel0 + lbl, kLabelEmbedAmp);
    add_dir(table, lbl, dicts.sem, kSemTag, kLabelTagAmp);
  }
  return table;
}

}  // namespace hop
