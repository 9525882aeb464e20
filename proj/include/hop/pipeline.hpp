#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hop/accounting.hpp"
#include "hop/dataset.hpp"
#include "hop/encoders.hpp"
#include "hop/fusion.hpp"
#include "hop/hints.hpp"
#include "hop/optim.hpp"
#include "hop/student.hpp"

namespace hop {

// End-to-end toy VQA pipeline: degraded base tokens -> hint generation ->
// fusion -> mean pool (+ pooled question) -> small adapter -> answer logits.
// Frozen pieces (dictionaries, embeddings, teachers, distilled student) are
// regenerated from seeds; only projections, fusion and adapter train.

struct ToyModelConfig {
  DimConfig dims;
  int grid = 24;
  FusionStrategy fusion = FusionStrategy::Joint;
  bool hint_affinity = true;
  bool hint_semantic = true;
  bool hint_question = true;
  AffinitySource affinity_source = AffinitySource::RawTeacher;
  std::string question_source = "llm-embed";  // or "alt-text-encoder"
  int semantic_k = 8;
  int num_distractors = 5;
  int adapter_width = 64;
  DegradeConfig degrade;

  ToyModelConfig() {
    dims.d = 64;
    dims.d_aff = 48;
    dims.d_sem = 16;
    dims.d_text = 64;
    dims.l = grid * grid;
    dims.n = grid * grid;
    dims.m = semantic_k;
    dims.k = 8;
  }
};

struct ToyModel {
  ToyModelConfig cfg;
  std::uint64_t master_seed = 0;
  Dictionaries dicts;            // frozen
  Tensor q_embed;                // [V, d_text] frozen, source picked by config
  Tensor label_embed;            // [classes+1, d_sem] frozen
  HintProjections proj;          // trainable
  std::optional<LinearProj> sim_proj;  // similarity-matrix source only
  FusionParams fusion;           // trainable
  Tensor adapter_w1, adapter_b1, adapter_w2, adapter_b2;  // trainable
  std::optional<StudentParams> student;  // frozen affinity source

  Params params();               // trainable parameters only
};

ToyModel make_toy_model(const ToyModelConfig& cfg, std::uint64_t master_seed);

// Loads a distilled student and freezes it as the model's affinity source.
void attach_student(ToyModel& model, StudentParams student);

// Answer logits [1, kNumAnswerClasses]; differentiable through trainables.
Tensor model_forward(const ToyModel& model, const DatasetItem& item);

struct TrainConfig {
  AdamWConfig opt;
  int epochs = 1;
  int batch_size = 8;
  int train_items = 0;  // 0 = whole dataset
};

// In-place training; per-step records returned. Items are consumed in file
// order (no shuffle) so runs are reproducible bit for bit.
std::vector<StepRecord> train_model(ToyModel& model, const std::vector<DatasetItem>& items,
                                    const TrainConfig& tcfg);

struct MetricsRecord {
  int items = 0;
  double accuracy = 0.0;
  double bleu = 0.0;
  std::array<double, kNumQAKinds> kind_accuracy{};
  std::array<int, kNumQAKinds> kind_items{};
};

MetricsRecord evaluate_model(const ToyModel& model, const std::vector<DatasetItem>& items);

}  // namespace hop
