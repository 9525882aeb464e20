#include "hop/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

namespace hop {

namespace {

using Gram = std::vector<int>;

std::map<Gram, int> gram_counts(const std::vector<int>& seq, int n) {
  std::map<Gram, int> counts;
  for (int i = 0; i + n <= static_cast<int>(seq.size()); i++)
    counts[Gram(seq.begin() + i, seq.begin() + i + n)]++;
  return counts;
}

}  // namespace

double bleu4(const std::vector<int>& candidate,
             const std::vector<std::vector<int>>& references) {
  if (candidate.empty() || references.empty()) return 0.0;
  const int c = static_cast<int>(candidate.size());

  int r = static_cast<int>(references[0].size());
  for (const auto& ref : references) {
    const int len = static_cast<int>(ref.size());
    const int best = std::abs(len - c), cur = std::abs(r - c);
    if (best < cur || (best == cur && len < r)) r = len;
  }
  if (r == 0) return 0.0;

  double log_p_sum = 0.0;
  int orders = 0;
  for (int n = 1; n <= 4; n++) {
    const int total = c - n + 1;
    if (total <= 0) break;
    auto cand_counts = gram_counts(candidate, n);
    int matched = 0;
    for (const auto& [gram, count] : cand_counts) {
      int best_ref = 0;
      for (const auto& ref : references) {
        auto ref_counts = gram_counts(ref, n);
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) best_ref = std::max(best_ref, it->second);
      }
      matched += std::min(count, best_ref);
    }
    const double p = matched > 0 ? static_cast<double>(matched) / total : 1.0 / (total + 1);
    log_p_sum += std::log(p);
    orders++;
  }
  if (orders == 0) return 0.0;

  const double bp = c >= r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / c);
  return bp * std::exp(log_p_sum / orders);
}

}  // namespace hop
