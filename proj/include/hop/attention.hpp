#pragma once

#include "hop/grad_check.hpp"
#include "hop/ops.hpp"
#include "hop/rng.hpp"

namespace hop {

// One multi-head attention block: four projections with biases.
struct MhaParams {
  int dim = 0;
  int heads = 0;
  Tensor wq, bq;
  Tensor wk, bk;
  Tensor wv, bv;
  Tensor wo, bo;

  // All tensors, prefixed, for optimizers and checkpoints.
  Params params(const std::string& prefix) const;
};

// Truncated-normal (0.02, |x|<2sigma) weights, zero biases. With
// zero_init_output the final projection starts at zero so a residual
// branch is an exact identity at step 0.
MhaParams make_mha_params(int dim, int heads, Rng& rng, bool zero_init_output = false);

// Scaled dot-product attention, h heads over column slices.
// query [Lq,d], kv [Lk,d] -> [Lq,d]. Lk must be positive.
Tensor multi_head_attention(const Tensor& query, const Tensor& kv, const MhaParams& p);

Tensor self_attention(const Tensor& x, const MhaParams& p);

}  // namespace hop
