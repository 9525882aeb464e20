#pragma once

#include <cstdint>

#include "hop/attention.hpp"
#include "hop/optim.hpp"

namespace hop {

struct StudentDecoderConfig {
  int layers = 4;
  int heads = 8;
  int width = 512;
  int ffn_ratio = 4;
  int input_dim = 0;
  int output_dim = 0;
};

struct StudentBlock {
  Tensor ln1_gamma, ln1_beta;
  MhaParams attn;
  Tensor ln2_gamma, ln2_beta;
  Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
};

struct StudentParams {
  StudentDecoderConfig cfg;
  Tensor in_w, in_b;
  std::vector<StudentBlock> blocks;
  Tensor out_w, out_b;

  Params params(const std::string& prefix = "student") const;
};

StudentParams make_student_params(const StudentDecoderConfig& cfg, Rng& rng);

// Closed-form trainable-scalar count for the decoder above; tests pin it
// against an exhaustive walk over an instantiated model.
int64_t student_param_count(const StudentDecoderConfig& cfg);

// Input linear, then pre-norm blocks (self-attention + GELU FFN, residuals on
// both), then output linear. Token count preserved.
Tensor student_forward(const Tensor& base_tokens, const StudentParams& p);

struct DistillRunConfig {
  AdamWConfig opt;
  int epochs = 1;
  int batch_size = 8;
  uint64_t seed = 1;
};

struct StepRecord {
  int step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct DistillResult {
  StudentParams student;
  std::vector<StepRecord> history;
  double final_cosine = 0.0;  // mean per-token cosine on the last pass
};

// Clears requires_grad on every tensor, for using a trained student as a
// frozen hint source.
void freeze_params(StudentParams& p);

// One (input, teacher target) pair per stream index.
using ExampleStream = std::function<std::pair<Tensor, Tensor>(int)>;

// Trains the student to match the teacher targets under the cosine loss.
// example_stream(i) must be deterministic for i in [0, num_items).
DistillResult distill_train(const ExampleStream& example_stream, int num_items,
                            const StudentDecoderConfig& scfg, const DistillRunConfig& rcfg);

// Mean per-token cosine similarity between student output and teacher target
// over the stream; evaluation only.
double mean_cosine_similarity(const StudentParams& student,
                              const ExampleStream& example_stream, int num_items);

}  // namespace hop
