#include "hop/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hop/bleu.hpp"
#include "hop/rng.hpp"

namespace hop {

namespace {

constexpr std::uint64_t kQEmbedStream = 0x5145u;
constexpr std::uint64_t kAltEmbedStream = 0x414c54u;
constexpr std::uint64_t kModelStream = 0x4d4f44u;

void push_proj(Params& out, const std::string& prefix, std::optional<LinearProj>& p) {
  if (!p) return;
  out.push_back({prefix + ".w", p->w});
  out.push_back({prefix + ".b", p->b});
}

}  // namespace

Params ToyModel::params() {
  Params out;
  push_proj(out, "proj.affinity", proj.affinity);
  push_proj(out, "proj.semantic", proj.semantic);
  push_proj(out, "proj.question", proj.question);
  push_proj(out, "proj.similarity", sim_proj);
  Params f = fusion.params("fusion");
  out.insert(out.end(), f.begin(), f.end());
  out.push_back({"adapter.w1", adapter_w1});
  out.push_back({"adapter.b1", adapter_b1});
  out.push_back({"adapter.w2", adapter_w2});
  out.push_back({"adapter.b2", adapter_b2});
  return out;
}

ToyModel make_toy_model(const ToyModelConfig& cfg, std::uint64_t master_seed) {
  const int d = cfg.dims.d;
  if (cfg.grid < 4) throw std::runtime_error("make_toy_model: grid too small");
  if (cfg.adapter_width <= 0) throw std::runtime_error("make_toy_model: bad adapter width");
  if (cfg.semantic_k <= 0) throw std::runtime_error("make_toy_model: semantic_k must be positive");
  if (cfg.question_source != "llm-embed" && cfg.question_source != "alt-text-encoder")
    throw std::runtime_error("make_toy_model: unknown question_source '" + cfg.question_source +
                             "'");

  ToyModel m;
  m.cfg = cfg;
  m.master_seed = master_seed;
  m.dicts = make_dictionaries(master_seed, d, cfg.dims.d_aff, cfg.dims.d_sem);
  {
    const bool alt = cfg.question_source == "alt-text-encoder";
    Rng erng(derive_seed(master_seed, alt ? kAltEmbedStream : kQEmbedStream));
    m.q_embed = randn({static_cast<int>(vocabulary().size()), cfg.dims.d_text}, erng, 0.3);
  }
  m.label_embed = make_label_embed(m.dicts);

  Rng rng(derive_seed(master_seed, kModelStream));
  if (cfg.affinity_source == AffinitySource::SimilarityMatrix)
    m.sim_proj = make_linear_proj(cfg.grid * cfg.grid, d, rng);
  else if (cfg.dims.d_aff != d)
    m.proj.affinity = make_linear_proj(cfg.dims.d_aff, d, rng);
  if (cfg.dims.d_sem != d) m.proj.semantic = make_linear_proj(cfg.dims.d_sem, d, rng);
  if (cfg.dims.d_text != d) m.proj.question = make_linear_proj(cfg.dims.d_text, d, rng);
  m.fusion = make_fusion_params(cfg.fusion, d, cfg.dims.heads, rng, true);

  const int in_dim = d + cfg.dims.d_text;
  m.adapter_w1 = trunc_normal_init({in_dim, cfg.adapter_width}, rng, 0.02);
  m.adapter_b1 = zeros({cfg.adapter_width});
  m.adapter_w2 = trunc_normal_init({cfg.adapter_width, kNumAnswerClasses}, rng, 0.02);
  m.adapter_b2 = zeros({kNumAnswerClasses});
  m.adapter_w1.set_requires_grad();
  m.adapter_b1.set_requires_grad();
  m.adapter_w2.set_requires_grad();
  m.adapter_b2.set_requires_grad();
  return m;
}

void attach_student(ToyModel& model, StudentParams student) {
  if (student.cfg.input_dim != model.cfg.dims.d ||
      student.cfg.output_dim != model.cfg.dims.d_aff)
    throw std::runtime_error("attach_student: student dims do not match the model");
  freeze_params(student);
  model.student = std::move(student);
}

Tensor model_forward(const ToyModel& model, const DatasetItem& item) {
  const auto& cfg = model.cfg;
  if (item.scene.grid != cfg.grid)
    throw std::runtime_error("model_forward: scene grid does not match the model");
  VisualTokens base = encode_base_tokens(item.scene, model.dicts, cfg.degrade);

  HintSet hs;
  if (cfg.hint_affinity) {
    hs.affinity.source = cfg.affinity_source;
    switch (cfg.affinity_source) {
      case AffinitySource::RawTeacher:
        hs.affinity.tokens = teacher_affinity_tokens(item.scene, model.dicts);
        break;
      case AffinitySource::SimilarityMatrix:
        hs.affinity =
            similarity_hint_tokens(teacher_affinity_tokens(item.scene, model.dicts),
                                   *model.sim_proj);
        break;
      case AffinitySource::Student:
        if (!model.student)
          throw std::runtime_error("model_forward: student affinity source without a student");
        hs.affinity.tokens = student_forward(base.tokens, *model.student);
        break;
    }
  } else {
    hs.affinity.tokens = zeros({0, cfg.dims.d_aff});
  }

  if (cfg.hint_semantic) {
    SemanticHint sem = teacher_semantic_queries(item.scene, model.dicts, cfg.num_distractors);
    const int total = sem.tokens.dim(0);
    hs.semantic = select_semantic_queries(sem.tokens, sem.confidences, sem.labels,
                                          std::min(cfg.semantic_k, total), model.label_embed);
  } else {
    hs.semantic.tokens = zeros({0, cfg.dims.d_sem});
  }

  QuestionHint question = question_hint_tokens(item.qa.question_ids, model.q_embed);
  if (cfg.hint_question)
    hs.question = question;
  else
    hs.question.tokens = zeros({0, cfg.dims.d_text});

  ProjectedHints ph = project_hints(hs, model.proj, cfg.dims.d);
  Tensor fused = fuse(base.tokens, ph.affinity, ph.semantic, ph.question, model.fusion);

  Tensor pooled = mean_rows(fused);
  Tensor qpool = mean_rows(question.tokens);
  Tensor x = concat_cols({pooled, qpool});
  Tensor h = gelu(add_row_bias(matmul(x, model.adapter_w1), model.adapter_b1));
  return add_row_bias(matmul(h, model.adapter_w2), model.adapter_b2);
}

std::vector<StepRecord> train_model(ToyModel& model, const std::vector<DatasetItem>& items,
                                    const TrainConfig& tcfg) {
  if (items.empty()) throw std::runtime_error("train_model: no items");
  if (tcfg.epochs <= 0 || tcfg.batch_size <= 0)
    throw std::runtime_error("train_model: bad train config");
  const int n = tcfg.train_items > 0
                    ? std::min<int>(static_cast<int>(items.size()), tcfg.train_items)
                    : static_cast<int>(items.size());

  Params params = model.params();
  const int steps_per_epoch = (n + tcfg.batch_size - 1) / tcfg.batch_size;
  const int total_steps = steps_per_epoch * tcfg.epochs;
  AdamW opt(params, tcfg.opt, total_steps);
  std::vector<StepRecord> history;
  history.reserve(total_steps);

  for (int epoch = 0; epoch < tcfg.epochs; epoch++)
    for (int s = 0; s < steps_per_epoch; s++) {
      const int lo = s * tcfg.batch_size;
      const int hi = std::min(n, lo + tcfg.batch_size);
      const int step_index = opt.step_count() + 1;
      double batch_loss = 0.0;
      // one backward per item keeps peak graph memory at a single item;
      // gradients accumulate additively, matching a mean over the batch
      for (int i = lo; i < hi; i++) {
        Tensor logits = model_forward(model, items[i]);
        Tensor loss = scale(cross_entropy_logits(logits, {items[i].qa.answer}),
                            1.0 / static_cast<double>(hi - lo));
        const double lv = scalar_value(loss);
        if (!std::isfinite(lv))
          throw std::runtime_error("train_model: non-finite loss at step " +
                                   std::to_string(step_index));
        batch_loss += lv;
        backward(loss);
      }
      const double lr = opt.step();
      history.push_back({step_index, lr, batch_loss});
    }
  return history;
}

MetricsRecord evaluate_model(const ToyModel& model, const std::vector<DatasetItem>& items) {
  if (items.empty()) throw std::runtime_error("evaluate_model: no items");
  MetricsRecord rec;
  rec.items = static_cast<int>(items.size());
  double bleu_sum = 0.0;
  for (const auto& item : items) {
    Tensor logits = model_forward(model, item);
    int pred = 0;
    for (int c = 1; c < kNumAnswerClasses; c++)
      if (logits.at(0, c) > logits.at(0, pred)) pred = c;
    const int kind = static_cast<int>(item.qa.kind);
    rec.kind_items[kind]++;
    if (pred == item.qa.answer) {
      rec.accuracy += 1.0;
      rec.kind_accuracy[kind] += 1.0;
    }
    bleu_sum += bleu4(render_answer_tokens(pred), {render_answer_tokens(item.qa.answer)});
  }
  rec.accuracy /= rec.items;
  rec.bleu = bleu_sum / rec.items;
  for (int k = 0; k < kNumQAKinds; k++)
    if (rec.kind_items[k] > 0) rec.kind_accuracy[k] /= rec.kind_items[k];
  return rec;
}

}  // namespace hop
