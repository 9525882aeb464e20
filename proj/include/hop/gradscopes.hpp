#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hop/grad_check.hpp"

namespace hop {

struct GradScopeResult {
  std::string scope;
  std::uint64_t seed = 0;
  double max_rel = 0.0;
  double max_abs = 0.0;
};

const std::vector<std::string>& grad_scope_names();  // attention fusion distill pipeline

// Builds small randomized instances of the named subsystem and checks reverse
// mode against central differences, one result row per seed (fusion: one per
// seed and strategy). The pipeline scope samples coordinates to stay fast.
std::vector<GradScopeResult> run_grad_scope(const std::string& scope, int seeds, double eps);

}  // namespace hop
