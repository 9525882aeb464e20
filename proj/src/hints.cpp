#include "hop/hints.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hop {

std::string format_affinity_source(AffinitySource s) {
  switch (s) {
    case AffinitySource::RawTeacher: return "raw-teacher";
    case AffinitySource::SimilarityMatrix: return "similarity-matrix";
    case AffinitySource::Student: return "student";
  }
  throw std::runtime_error("format_affinity_source: bad enum");
}

AffinitySource parse_affinity_source(const std::string& s) {
  if (s == "raw-teacher") return AffinitySource::RawTeacher;
  if (s == "similarity-matrix") return AffinitySource::SimilarityMatrix;
  if (s == "student") return AffinitySource::Student;
  throw std::runtime_error("parse_affinity_source: unknown source '" + s + "'");
}

LinearProj make_linear_proj(int in, int out, Rng& rng, bool zero_init) {
  LinearProj p;
  p.w = zero_init ? zeros({in, out}) : trunc_normal_init({in, out}, rng, 0.02);
  p.b = zeros({out});
  p.w.set_requires_grad();
  p.b.set_requires_grad();
  return p;
}

Tensor apply_linear(const Tensor& x, const LinearProj& p) {
  return add_row_bias(matmul(x, p.w), p.b);
}

Tensor downsample_grid(const Tensor& feature_map, int grid, int target_rows,
                       int target_cols) {
  if (feature_map.rank() != 2 || feature_map.dim(0) != grid * grid)
    throw std::runtime_error("downsample_grid: want [" + std::to_string(grid * grid) +
                             ",d], got " + shape_str(feature_map.shape));
  if (target_rows <= 0 || target_cols <= 0 || grid < target_rows || grid < target_cols ||
      grid % target_rows != 0 || grid % target_cols != 0)
    throw std::runtime_error("downsample_grid: grid " + std::to_string(grid) +
                             " not divisible by target " + std::to_string(target_rows) +
                             "x" + std::to_string(target_cols));
  const int d = feature_map.dim(1);
  const int wr = grid / target_rows, wc = grid / target_cols;
  Tensor out = zeros({target_rows * target_cols, d});
  const double inv = 1.0 / (wr * wc);
  for (int tr = 0; tr < target_rows; tr++)
    for (int tc = 0; tc < target_cols; tc++)
      for (int j = 0; j < d; j++) {
        double s = 0.0;
        for (int r = 0; r < wr; r++)
          for (int c = 0; c < wc; c++)
            s += feature_map.at((tr * wr + r) * grid + tc * wc + c, j);
        out.at(tr * target_cols + tc, j) = s * inv;
      }
  return out;
}

AffinityHint similarity_hint_tokens(const Tensor& teacher_tokens, const LinearProj& proj) {
  if (teacher_tokens.rank() != 2)
    throw std::runtime_error("similarity_hint_tokens: want 2-D tokens");
  const int n = teacher_tokens.dim(0), d = teacher_tokens.dim(1);
  if (proj.w.dim(0) != n)
    throw std::runtime_error("similarity_hint_tokens: projection expects " +
                             std::to_string(proj.w.dim(0)) + " rows, got " +
                             std::to_string(n));
  std::vector<double> norms(n);
  for (int i = 0; i < n; i++) {
    double s = 0.0;
    for (int j = 0; j < d; j++) s += teacher_tokens.at(i, j) * teacher_tokens.at(i, j);
    norms[i] = std::sqrt(s);
    if (norms[i] == 0.0)
      throw std::runtime_error("similarity_hint_tokens: zero-norm token row " +
                               std::to_string(i));
  }
  Tensor sim = zeros({n, n});
  for (int i = 0; i < n; i++)
    for (int j = 0; j < n; j++) {
      double dot = 0.0;
      for (int c = 0; c < d; c++) dot += teacher_tokens.at(i, c) * teacher_tokens.at(j, c);
      sim.at(i, j) = dot / (norms[i] * norms[j]);
    }
  AffinityHint h;
  h.tokens = apply_linear(sim, proj);
  h.source = AffinitySource::SimilarityMatrix;
  return h;
}

SemanticHint select_semantic_queries(const Tensor& queries,
                                     const std::vector<double>& confidences,
                                     const std::vector<int>& labels, int k,
                                     const Tensor& label_embed) {
  if (queries.rank() != 2) throw std::runtime_error("select_semantic_queries: want 2-D queries");
  const int q = queries.dim(0), d = queries.dim(1);
  if (static_cast<int>(confidences.size()) != q || static_cast<int>(labels.size()) != q)
    throw std::runtime_error("select_semantic_queries: metadata size mismatch");
  if (k < 0 || k > q)
    throw std::runtime_error("select_semantic_queries: k=" + std::to_string(k) +
                             " out of range for " + std::to_string(q) + " queries");
  if (label_embed.rank() != 2 || label_embed.dim(1) != d)
    throw std::runtime_error("select_semantic_queries: label embedding width mismatch");
  const int c = label_embed.dim(0);
  for (int l : labels)
    if (l < 0 || l >= c)
      throw std::runtime_error("select_semantic_queries: label " + std::to_string(l) +
                               " out of " + std::to_string(c));

  std::vector<int> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return confidences[static_cast<size_t>(a)] > confidences[static_cast<size_t>(b)];
  });
  order.resize(k);

  SemanticHint h;
  h.tokens = zeros({k, d});
  h.labels.reserve(k);
  h.confidences.reserve(k);
  for (int r = 0; r < k; r++) {
    const int src = order[static_cast<size_t>(r)];
    for (int j = 0; j < d; j++)
      h.tokens.at(r, j) = queries.at(src, j) + label_embed.at(labels[static_cast<size_t>(src)], j);
    h.labels.push_back(labels[static_cast<size_t>(src)]);
    h.confidences.push_back(confidences[static_cast<size_t>(src)]);
  }
  return h;
}

QuestionHint question_hint_tokens(const std::vector<int>& token_ids,
                                  const Tensor& embed_table) {
  if (embed_table.rank() != 2)
    throw std::runtime_error("question_hint_tokens: want 2-D embedding table");
  const int v = embed_table.dim(0), d = embed_table.dim(1);
  for (int id : token_ids)
    if (id < 0 || id >= v)
      throw std::runtime_error("question_hint_tokens: id " + std::to_string(id) +
                               " out of vocabulary " + std::to_string(v));
  QuestionHint h;
  h.token_ids = token_ids;
  const int k = static_cast<int>(token_ids.size());
  h.tokens = zeros({k, d});
  for (int i = 0; i < k; i++)
    for (int j = 0; j < d; j++) h.tokens.at(i, j) = embed_table.at(token_ids[i], j);
  return h;
}

namespace {

Tensor project_one(const Tensor& tokens, const std::optional<LinearProj>& proj, int d,
                   const char* which) {
  const int rows = tokens.defined() ? tokens.dim(0) : 0;
  const int src = tokens.defined() && tokens.rank() == 2 ? tokens.dim(1) : d;
  if (rows == 0) return zeros({0, d});
  if (src == d && !proj) return tokens;
  if (!proj)
    throw std::runtime_error(std::string("project_hints: ") + which + " tokens are " +
                             std::to_string(src) + "-wide but no projection to " +
                             std::to_string(d) + " was given");
  if (proj->w.dim(0) != src || proj->w.dim(1) != d)
    throw std::runtime_error(std::string("project_hints: ") + which +
                             " projection shape " + shape_str(proj->w.shape) +
                             " does not map " + std::to_string(src) + " to " +
                             std::to_string(d));
  return apply_linear(tokens, *proj);
}

}  // namespace

ProjectedHints project_hints(const HintSet& hints, const HintProjections& proj, int d) {
  ProjectedHints out;
  out.affinity = project_one(hints.affinity.tokens, proj.affinity, d, "affinity");
  out.semantic = project_one(hints.semantic.tokens, proj.semantic, d, "semantic");
  out.question = project_one(hints.question.tokens, proj.question, d, "question");
  return out;
}

}  // namespace hop
