#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hop/tensor.hpp"

namespace hop {

struct Parameter {
  std::string name;
  Tensor value;  // leaf with requires_grad set
};

using Params = std::vector<Parameter>;

// Central differences of a scalar objective with respect to every coordinate
// of every parameter. The objective is evaluated with perturbed parameter
// values in place; it must be deterministic (checked by evaluating twice).
std::vector<std::vector<double>> finite_diff_grad(const std::function<double()>& f,
                                                  Params& params, double eps = 1e-5);

struct GradCheckEntry {
  std::string name;
  double max_rel = 0.0;
  double max_abs = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel = 0.0;
  bool pass(double tol) const { return max_rel < tol; }
};

// Runs reverse mode through loss_fn (which must rebuild its graph from the
// current parameter values on every call), then compares against central
// differences coordinate by coordinate. max_coords_per_param > 0 checks an
// evenly strided sample of each tensor instead of every coordinate, which
// keeps large models affordable.
GradCheckReport check_gradients(const std::function<Tensor()>& loss_fn, Params& params,
                                double eps = 1e-5, int max_coords_per_param = 0);

}  // namespace hop
