#include "hop/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace hop {

std::vector<std::vector<double>> finite_diff_grad(const std::function<double()>& f,
                                                  Params& params, double eps) {
  if (eps <= 0.0) throw std::runtime_error("finite_diff_grad: eps must be positive");
  const double f0 = f();
  const double f1 = f();
  if (!(f0 == f1))
    throw std::runtime_error("finite_diff_grad: objective is not deterministic");
  if (!std::isfinite(f0))
    throw std::runtime_error("finite_diff_grad: non-finite objective");

  std::vector<std::vector<double>> grads;
  grads.reserve(params.size());
  for (Parameter& p : params) {
    std::vector<double>& v = *p.value.data;
    std::vector<double> g(v.size());
    for (size_t i = 0; i < v.size(); i++) {
      const double saved = v[i];
      v[i] = saved + eps;
      const double fp = f();
      v[i] = saved - eps;
      const double fm = f();
      v[i] = saved;
      g[i] = (fp - fm) / (2.0 * eps);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

GradCheckReport check_gradients(const std::function<Tensor()>& loss_fn, Params& params,
                                double eps, int max_coords_per_param) {
  if (eps <= 0.0) throw std::runtime_error("check_gradients: eps must be positive");
  for (Parameter& p : params) zero_grad(p.value);
  Tensor loss = loss_fn();
  backward(loss);

  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (Parameter& p : params) analytic.push_back(*p.value.grad);

  auto objective = [&]() { return scalar_value(loss_fn()); };
  const double f0 = objective();
  if (!(f0 == objective()))
    throw std::runtime_error("check_gradients: objective is not deterministic");
  if (!std::isfinite(f0)) throw std::runtime_error("check_gradients: non-finite objective");

  GradCheckReport report;
  for (size_t pi = 0; pi < params.size(); pi++) {
    std::vector<double>& v = *params[pi].value.data;
    const size_t numel = v.size();
    size_t stride = 1;
    if (max_coords_per_param > 0 && numel > static_cast<size_t>(max_coords_per_param))
      stride = numel / max_coords_per_param;
    GradCheckEntry e;
    e.name = params[pi].name;
    for (size_t i = 0; i < numel; i += stride) {
      const double saved = v[i];
      v[i] = saved + eps;
      const double fp = objective();
      v[i] = saved - eps;
      const double fm = objective();
      v[i] = saved;
      const double n = (fp - fm) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double abs_err = std::fabs(a - n);
      // central differences carry ~|f|*1e-16/eps of rounding noise, so
      // coordinates under the floor are held to an absolute bar instead of a
      // relative one; at tol 1e-4 that bar is 1e-8, well above the noise
      const double rel = abs_err / std::max({std::fabs(a), std::fabs(n), 1e-4});
      e.max_abs = std::max(e.max_abs, abs_err);
      e.max_rel = std::max(e.max_rel, rel);
    }
    report.max_rel = std::max(report.max_rel, e.max_rel);
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace hop
