#include "hop/accounting.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace hop {

namespace {

void check_dims(const DimConfig& dims) {
  if (dims.d <= 0 || dims.d_aff <= 0 || dims.d_sem <= 0 || dims.d_text <= 0 ||
      dims.l <= 0 || dims.n < 0 || dims.m < 0 || dims.k < 0 || dims.heads <= 0 ||
      dims.d % dims.heads != 0)
    throw std::runtime_error("DimConfig: invalid geometry");
}

}  // namespace

int64_t count_fusion_params(FusionStrategy s, const DimConfig& dims) {
  check_dims(dims);
  const int64_t d = dims.d;
  const int64_t per_attn = 4 * d * d + 4 * d;
  int64_t total = fusion_attention_layers(s) * per_attn;
  total += static_cast<int64_t>(dims.d_sem) * d + d;   // semantic projection
  total += static_cast<int64_t>(dims.d_text) * d + d;  // question projection
  if (dims.d_aff != dims.d) total += static_cast<int64_t>(dims.d_aff) * d + d;
  return total;
}

double estimate_fusion_flops(FusionStrategy s, const DimConfig& dims) {
  check_dims(dims);
  const double d = dims.d;
  double macs = 0.0;
  // Hint projections run once per item regardless of strategy.
  macs += static_cast<double>(dims.m) * dims.d_sem * d;
  macs += static_cast<double>(dims.k) * dims.d_text * d;
  if (dims.d_aff != dims.d) macs += static_cast<double>(dims.n) * dims.d_aff * d;
  for (const AttentionCall& c : fusion_wiring(dims.l, dims.n, dims.m, dims.k, s)) {
    const double q = c.query_rows, kv = c.kv_rows;
    macs += q * d * d;         // query projection
    macs += 2.0 * kv * d * d;  // key and value projections
    macs += 2.0 * q * kv * d;  // scores and weighted sum, summed over heads
    macs += q * d * d;         // output projection
  }
  return 2.0 * macs;
}

CostReport cost_report(FusionStrategy s, const DimConfig& dims) {
  return {s, count_fusion_params(s, dims), estimate_fusion_flops(s, dims)};
}

std::string cost_table_csv(const DimConfig& dims) {
  std::ostringstream os;
  os << "# fusion cost model: params exact, flops = 2 x multiply-adds\n";
  os << "# geometry: d=" << dims.d << " d_aff=" << dims.d_aff << " d_sem=" << dims.d_sem
     << " d_text=" << dims.d_text << " l=" << dims.l << " n=" << dims.n
     << " m=" << dims.m << " k=" << dims.k << " heads=" << dims.heads << "\n";
  os << "# projections: semantic and question always counted; affinity only when "
        "d_aff differs from d\n";
  os << "# concat owns no attention layers: its params are projections only\n";
  os << "strategy,params,params_M,gflops\n";
  for (FusionStrategy s :
       {FusionStrategy::Concatenation, FusionStrategy::SelfCross, FusionStrategy::Joint,
        FusionStrategy::Sequential, FusionStrategy::Parallel}) {
    const CostReport r = cost_report(s, dims);
    os << format_fusion_strategy(s) << "," << r.params << ",";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", r.params / 1e6);
    os << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.3f", r.flops / 1e9);
    os << buf << "\n";
  }
  return os.str();
}

}  // namespace hop
