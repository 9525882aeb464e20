#pragma once

#include <cstdint>
#include <string>

#include "hop/fusion.hpp"

namespace hop {

// Default geometry for the paper-scale cost model: 1024-dim model tokens,
// 576 visual + 576 affinity tokens, 32 semantic queries, 40 question tokens,
// 4096-dim question embeddings projected down, 256-dim semantic queries
// projected up, affinity passed through unprojected.
struct DimConfig {
  int d = 1024;
  int d_aff = 1024;
  int d_sem = 256;
  int d_text = 4096;
  int l = 576;
  int n = 576;
  int m = 32;
  int k = 40;
  int heads = 8;
};

struct CostReport {
  FusionStrategy strategy = FusionStrategy::Joint;
  int64_t params = 0;
  double flops = 0.0;  // 2 x multiply-adds
};

// Fusion attention layers (4d^2+4d each) plus the hint projections the
// geometry requires: semantic d_sem->d, question d_text->d, affinity only
// when d_aff differs from d.
int64_t count_fusion_params(FusionStrategy s, const DimConfig& dims);

// 2 x multiply-adds over hint projections plus, per attention call in the
// strategy's wiring, the four dense projections and the two score/value
// contractions. Softmax and normalization are ignored (sub-percent here).
double estimate_fusion_flops(FusionStrategy s, const DimConfig& dims);

CostReport cost_report(FusionStrategy s, const DimConfig& dims);

// The CSV emitted by the cost benchmark: assumption header plus one row per
// strategy.
std::string cost_table_csv(const DimConfig& dims);

}  // namespace hop
