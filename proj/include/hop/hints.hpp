#pragma once

#include <optional>

#include "hop/attention.hpp"
#include "hop/ops.hpp"

namespace hop {

// Patch tokens P laid out row-major over a rows x cols grid.
struct VisualTokens {
  Tensor tokens;  // [rows*cols, d]
  int rows = 0;
  int cols = 0;
};

enum class AffinitySource { RawTeacher, SimilarityMatrix, Student };

std::string format_affinity_source(AffinitySource s);
AffinitySource parse_affinity_source(const std::string& s);

struct AffinityHint {
  Tensor tokens;  // [N, d_aff]
  AffinitySource source = AffinitySource::RawTeacher;
};

struct SemanticHint {
  Tensor tokens;  // [M, d_sem]
  std::vector<int> labels;
  std::vector<double> confidences;  // non-increasing
};

struct QuestionHint {
  Tensor tokens;  // [K, d_text]
  std::vector<int> token_ids;
};

struct HintSet {
  AffinityHint affinity;
  SemanticHint semantic;
  QuestionHint question;
};

struct LinearProj {
  Tensor w;  // [in, out]
  Tensor b;  // [out]
};

LinearProj make_linear_proj(int in, int out, Rng& rng, bool zero_init = false);
Tensor apply_linear(const Tensor& x, const LinearProj& p);

// A projection is present exactly when its hint's source dim differs from the
// model dim; apply-time mismatches throw.
struct HintProjections {
  std::optional<LinearProj> affinity;   // d_aff -> d
  std::optional<LinearProj> semantic;   // d_sem -> d
  std::optional<LinearProj> question;   // d_text -> d
};

// Non-overlapping average pooling of a square feature grid down to
// target_rows x target_cols; grid must divide evenly.
Tensor downsample_grid(const Tensor& feature_map, int grid, int target_rows = 24,
                       int target_cols = 24);

// Row i of the cosine similarity matrix of the teacher tokens, pushed through
// a linear layer, becomes hint token i.
AffinityHint similarity_hint_tokens(const Tensor& teacher_tokens, const LinearProj& proj);

// Top-k queries by confidence (ties to the lower index), each with its label
// embedding added, ordered by descending confidence.
SemanticHint select_semantic_queries(const Tensor& queries,
                                     const std::vector<double>& confidences,
                                     const std::vector<int>& labels, int k,
                                     const Tensor& label_embed);

QuestionHint question_hint_tokens(const std::vector<int>& token_ids,
                                  const Tensor& embed_table);

// Returns all three hint token matrices mapped to width d. Empty hints pass
// through as [0, d].
struct ProjectedHints {
  Tensor affinity;
  Tensor semantic;
  Tensor question;
};
ProjectedHints project_hints(const HintSet& hints, const HintProjections& proj, int d);

}  // namespace hop
