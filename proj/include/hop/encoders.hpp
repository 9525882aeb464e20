#pragma once

#include <cstdint>

#include "hop/hints.hpp"
#include "hop/scene.hpp"
#include "hop/tensor.hpp"

namespace hop {

// Frozen random orthonormal direction dictionaries. Every synthetic signal is
// a linear combination of these rows, so probes and tests can reason about
// exactly which channel carries which fact.
struct Dictionaries {
  Tensor base;  // [kBaseDirCount, d]
  Tensor aff;   // [kAffDirCount, d_aff]
  Tensor sem;   // [kSemDirCount, d_sem]
};

// base dictionary rows
inline constexpr int kBaseClass0 = 0;                      // 5 class dirs
inline constexpr int kBaseSlot0 = kNumClasses;             // 8 instance slot dirs
inline constexpr int kBaseTexture0 = kBaseSlot0 + kInstanceSlots;  // 5 texture dirs
inline constexpr int kBaseWeather0 = kBaseTexture0 + kNumClasses;
inline constexpr int kBaseLighting0 = kBaseWeather0 + kNumWeather;
inline constexpr int kBaseBackground = kBaseLighting0 + kNumLighting;
inline constexpr int kBaseDirCount = kBaseBackground + 1;  // 24

// affinity dictionary rows
inline constexpr int kAffClass0 = 0;                      // 5 class dirs
inline constexpr int kAffSlot0 = kNumClasses;             // 8 instance slot dirs
inline constexpr int kAffPair0 = kAffSlot0 + kInstanceSlots;  // 5 adjacency dirs
inline constexpr int kAffBackground = kAffPair0 + kNumClasses;
inline constexpr int kAffDirCount = kAffBackground + 1;   // 19

// semantic dictionary rows
inline constexpr int kSemLabel0 = 0;                      // 5 classes + background label
inline constexpr int kSemTag = kNumClasses + 1;
inline constexpr int kSemPosX = kSemTag + 1;
inline constexpr int kSemPosY = kSemPosX + 1;
inline constexpr int kSemDirCount = kSemPosY + 1;         // 9

Dictionaries make_dictionaries(std::uint64_t master_seed, int d, int d_aff, int d_sem);

struct DegradeConfig {
  bool affinity_scramble = true;
  double semantic_dropout = 0.9;  // fraction of instance cells losing the class dir
};

// Degraded per-cell tokens standing in for a contrastively trained encoder:
// class identity mostly dropped, instance slots sign-scrambled per 3x3 block,
// a per-class texture channel (zero mean, so invisible to mean pooling), and
// global weather/lighting dirs on every cell.
VisualTokens encode_base_tokens(const Scene& scene, const Dictionaries& dicts,
                                const DegradeConfig& degrade);

// Clean affinity teacher: cells of one instance share a direction dominated by
// the class dir, scaled by a per-instance jitter; adjacent instance pairs add
// a pair dir; background cells share a background dir.
Tensor teacher_affinity_tokens(const Scene& scene, const Dictionaries& dicts);

// One high-confidence query per instance (label + centroid position) plus
// low-confidence distractors whose labels are polluted with real classes.
SemanticHint teacher_semantic_queries(const Scene& scene, const Dictionaries& dicts,
                                      int num_distractors);

// Frozen label embedding table [kNumClasses + 1, d_sem] used when assembling
// semantic hint tokens.
Tensor make_label_embed(const Dictionaries& dicts);

}  // namespace hop
