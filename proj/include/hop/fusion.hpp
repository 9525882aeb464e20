#pragma once

#include "hop/attention.hpp"

namespace hop {

enum class FusionStrategy { Concatenation, SelfCross, Joint, Sequential, Parallel };

// Config-file names: "concat" | "self-cross" | "joint" | "sequential" | "parallel".
FusionStrategy parse_fusion_strategy(const std::string& s);
std::string format_fusion_strategy(FusionStrategy s);

// Number of attention layers the strategy owns: 0 / 2 (SA+CA) / 1 / 3 / 3.
int fusion_attention_layers(FusionStrategy s);

struct FusionParams {
  FusionStrategy strategy = FusionStrategy::Joint;
  int dim = 0;
  int heads = 8;
  std::vector<MhaParams> attn;  // count fixed by strategy

  Params params(const std::string& prefix) const;
};

// Output projections start at zero so every attention-based strategy is an
// exact identity at step 0 (residual floor).
FusionParams make_fusion_params(FusionStrategy s, int dim, int heads, Rng& rng,
                                bool zero_init_output = true);

// One attention call in a strategy's wiring: its query, assembled key-value
// set, and computed output, in execution order.
struct AssembledCall {
  Tensor query;
  Tensor kv;
  Tensor out;
  bool self = false;  // SA rather than CA
};

// Runs the strategy's attention calls and exposes the wiring. Concatenation
// returns an empty list. A CA whose assembled KV has no rows throws, except
// Joint, whose KV always includes the visual tokens.
std::vector<AssembledCall> fused_kv_assembly(const Tensor& p, const Tensor& h_a,
                                             const Tensor& h_s, const Tensor& h_q,
                                             const FusionParams& params);

// Shape-level wiring used by the cost model; mirrors fused_kv_assembly.
struct AttentionCall {
  int query_rows = 0;
  int kv_rows = 0;
  bool self = false;
};
std::vector<AttentionCall> fusion_wiring(int l, int n, int m, int k, FusionStrategy s);

// Hint token matrices already projected to the model dim. Zero-row matrices
// mean "hint disabled".
Tensor fuse(const Tensor& p, const Tensor& h_a, const Tensor& h_s, const Tensor& h_q,
            const FusionParams& params);

}  // namespace hop
