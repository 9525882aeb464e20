#include "hop/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace hop {

double lr_at_step(int step, int total_steps, double base_lr, double warmup_ratio) {
  if (total_steps <= 0) throw std::runtime_error("lr_at_step: total_steps must be positive");
  if (step < 1 || step > total_steps)
    throw std::runtime_error("lr_at_step: step " + std::to_string(step) + " outside [1," +
                             std::to_string(total_steps) + "]");
  if (warmup_ratio < 0.0 || warmup_ratio >= 1.0)
    throw std::runtime_error("lr_at_step: warmup_ratio outside [0,1)");
  const int warmup = static_cast<int>(std::llround(warmup_ratio * total_steps));
  if (step <= warmup) return base_lr * step / warmup;
  if (total_steps == warmup) return base_lr;
  constexpr double pi = 3.14159265358979323846;
  const double progress = static_cast<double>(step - warmup) / (total_steps - warmup);
  return base_lr * 0.5 * (1.0 + std::cos(pi * progress));
}

AdamW::AdamW(Params& params, AdamWConfig cfg, int total_steps)
    : params_(params), cfg_(cfg), total_steps_(total_steps) {
  if (total_steps <= 0) throw std::runtime_error("AdamW: total_steps must be positive");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Parameter& p : params_) {
    if (!p.value.requires_grad)
      throw std::runtime_error("AdamW: parameter " + p.name + " has no gradient buffer");
    m_.emplace_back(p.value.numel(), 0.0);
    v_.emplace_back(p.value.numel(), 0.0);
  }
}

double AdamW::step() {
  t_++;
  if (t_ > total_steps_)
    throw std::runtime_error("AdamW: stepped past scheduled total " +
                             std::to_string(total_steps_));
  const double lr = lr_at_step(t_, total_steps_, cfg_.base_lr, cfg_.warmup_ratio);
  const double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (size_t pi = 0; pi < params_.size(); pi++) {
    Tensor& p = params_[pi].value;
    std::vector<double>& m = m_[pi];
    std::vector<double>& v = v_[pi];
    const size_t n = p.numel();
    for (size_t i = 0; i < n; i++) {
      const double g = (*p.grad)[i];
      if (!std::isfinite(g))
        throw std::runtime_error("AdamW: non-finite gradient in " + params_[pi].name +
                                 " at step " + std::to_string(t_));
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      (*p.data)[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) +
                            cfg_.weight_decay * (*p.data)[i]);
      (*p.grad)[i] = 0.0;
    }
  }
  return lr;
}

}  // namespace hop
