#pragma once

#include <vector>

namespace hop {

// Sentence BLEU-4 over token id sequences.
//  - modified n-gram precision with reference-clipped counts, n = 1..4
//  - n-gram orders the candidate is too short to form are skipped
//  - a zero match count at order n is smoothed to 1 / (total_n + 1)
//  - brevity penalty exp(1 - r/c) with r the closest reference length
//    (ties resolved toward the shorter reference)
// Empty candidate or empty reference list scores 0.
double bleu4(const std::vector<int>& candidate,
             const std::vector<std::vector<int>>& references);

}  // namespace hop
