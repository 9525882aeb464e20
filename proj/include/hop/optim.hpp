#pragma once

#include "hop/grad_check.hpp"

namespace hop {

// Linear warmup to base_lr over ceil(warmup_ratio * total) steps, then cosine
// decay to zero. Steps are 1-indexed; the peak lands exactly on the last
// warmup step.
double lr_at_step(int step, int total_steps, double base_lr, double warmup_ratio);

struct AdamWConfig {
  double base_lr = 2e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double warmup_ratio = 0.03;
};

// Decoupled weight decay; per-parameter first/second moment buffers keyed by
// position in the Params list.
class AdamW {
 public:
  AdamW(Params& params, AdamWConfig cfg, int total_steps);

  // Applies one update from the gradients currently in the parameter tensors
  // and clears them. Returns the learning rate used.
  double step();

  int step_count() const { return t_; }

 private:
  Params& params_;
  AdamWConfig cfg_;
  int total_steps_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace hop
