#include "hop/student.hpp"

#include <cmath>
#include <stdexcept>

namespace hop {

Params StudentParams::params(const std::string& prefix) const {
  Params out = {{prefix + ".in_w", in_w}, {prefix + ".in_b", in_b}};
  for (size_t i = 0; i < blocks.size(); i++) {
    const StudentBlock& b = blocks[i];
    const std::string bp = prefix + ".block" + std::to_string(i);
    Params attn = b.attn.params(bp + ".attn");
    out.insert(out.end(), {{bp + ".ln1_gamma", b.ln1_gamma}, {bp + ".ln1_beta", b.ln1_beta}});
    out.insert(out.end(), attn.begin(), attn.end());
    out.insert(out.end(), {{bp + ".ln2_gamma", b.ln2_gamma},
                           {bp + ".ln2_beta", b.ln2_beta},
                           {bp + ".ffn_w1", b.ffn_w1},
                           {bp + ".ffn_b1", b.ffn_b1},
                           {bp + ".ffn_w2", b.ffn_w2},
                           {bp + ".ffn_b2", b.ffn_b2}});
  }
  out.insert(out.end(), {{prefix + ".out_w", out_w}, {prefix + ".out_b", out_b}});
  return out;
}

StudentParams make_student_params(const StudentDecoderConfig& cfg, Rng& rng) {
  if (cfg.layers < 1 || cfg.width % cfg.heads != 0 || cfg.input_dim <= 0 ||
      cfg.output_dim <= 0 || cfg.ffn_ratio < 1)
    throw std::runtime_error("make_student_params: bad config");
  const int w = cfg.width, f = cfg.width * cfg.ffn_ratio;
  StudentParams p;
  p.cfg = cfg;
  p.in_w = trunc_normal_init({cfg.input_dim, w}, rng, 0.02);
  p.in_b = zeros({w});
  for (int i = 0; i < cfg.layers; i++) {
    StudentBlock b;
    b.ln1_gamma = full({w}, 1.0);
    b.ln1_beta = zeros({w});
    b.attn = make_mha_params(w, cfg.heads, rng);
    b.ln2_gamma = full({w}, 1.0);
    b.ln2_beta = zeros({w});
    b.ffn_w1 = trunc_normal_init({w, f}, rng, 0.02);
    b.ffn_b1 = zeros({f});
    b.ffn_w2 = trunc_normal_init({f, w}, rng, 0.02);
    b.ffn_b2 = zeros({w});
    p.blocks.push_back(std::move(b));
  }
  p.out_w = trunc_normal_init({w, cfg.output_dim}, rng, 0.02);
  p.out_b = zeros({cfg.output_dim});
  for (Tensor* t : {&p.in_w, &p.in_b, &p.out_w, &p.out_b}) t->set_requires_grad();
  for (StudentBlock& b : p.blocks)
    for (Tensor* t : {&b.ln1_gamma, &b.ln1_beta, &b.ln2_gamma, &b.ln2_beta, &b.ffn_w1,
                      &b.ffn_b1, &b.ffn_w2, &b.ffn_b2})
      t->set_requires_grad();
  return p;
}

int64_t student_param_count(const StudentDecoderConfig& cfg) {
  const int64_t w = cfg.width, f = static_cast<int64_t>(cfg.width) * cfg.ffn_ratio;
  const int64_t attn = 4 * w * w + 4 * w;
  const int64_t norms = 2 * (2 * w);
  const int64_t ffn = w * f + f + f * w + w;
  const int64_t io = static_cast<int64_t>(cfg.input_dim) * w + w +
                     w * static_cast<int64_t>(cfg.output_dim) + cfg.output_dim;
  return cfg.layers * (attn + norms + ffn) + io;
}

Tensor student_forward(const Tensor& base_tokens, const StudentParams& p) {
  if (base_tokens.rank() != 2 || base_tokens.dim(1) != p.cfg.input_dim)
    throw std::runtime_error("student_forward: want [L," +
                             std::to_string(p.cfg.input_dim) + "], got " +
                             shape_str(base_tokens.shape));
  if (base_tokens.dim(0) < 1) throw std::runtime_error("student_forward: empty input");
  Tensor x = add_row_bias(matmul(base_tokens, p.in_w), p.in_b);
  for (const StudentBlock& b : p.blocks) {
    x = add(x, self_attention(layer_norm(x, b.ln1_gamma, b.ln1_beta), b.attn));
    Tensor h = layer_norm(x, b.ln2_gamma, b.ln2_beta);
    h = add_row_bias(matmul(h, b.ffn_w1), b.ffn_b1);
    h = gelu(h);
    h = add_row_bias(matmul(h, b.ffn_w2), b.ffn_b2);
    x = add(x, h);
  }
  return add_row_bias(matmul(x, p.out_w), p.out_b);
}

void freeze_params(StudentParams& p) {
  auto off = [](Tensor& t) { t.requires_grad = false; };
  off(p.in_w);
  off(p.in_b);
  for (auto& b : p.blocks) {
    off(b.ln1_gamma);
    off(b.ln1_beta);
    for (Tensor* t : {&b.attn.wq, &b.attn.bq, &b.attn.wk, &b.attn.bk, &b.attn.wv, &b.attn.bv,
                      &b.attn.wo, &b.attn.bo})
      off(*t);
    off(b.ln2_gamma);
    off(b.ln2_beta);
    off(b.ffn_w1);
    off(b.ffn_b1);
    off(b.ffn_w2);
    off(b.ffn_b2);
  }
  off(p.out_w);
  off(p.out_b);
}

namespace {

double batch_cosine(const Tensor& student, const Tensor& teacher) {
  const int n = student.dim(0), d = student.dim(1);
  double acc = 0.0;
  for (int i = 0; i < n; i++) {
    double ss = 0.0, tt = 0.0, st = 0.0;
    for (int j = 0; j < d; j++) {
      ss += student.at(i, j) * student.at(i, j);
      tt += teacher.at(i, j) * teacher.at(i, j);
      st += student.at(i, j) * teacher.at(i, j);
    }
    acc += st / (std::max(std::sqrt(ss), 1e-12) * std::sqrt(tt));
  }
  return acc / n;
}

}  // namespace

DistillResult distill_train(const ExampleStream& example_stream, int num_items,
                            const StudentDecoderConfig& scfg, const DistillRunConfig& rcfg) {
  if (num_items <= 0) throw std::runtime_error("distill_train: empty stream");
  if (rcfg.epochs <= 0 || rcfg.batch_size <= 0)
    throw std::runtime_error("distill_train: bad run config");
  Rng rng(derive_seed(rcfg.seed, 0x5744u));
  DistillResult res;
  res.student = make_student_params(scfg, rng);
  Params params = res.student.params();

  const int steps_per_epoch = (num_items + rcfg.batch_size - 1) / rcfg.batch_size;
  const int total_steps = steps_per_epoch * rcfg.epochs;
  AdamW opt(params, rcfg.opt, total_steps);

  for (int epoch = 0; epoch < rcfg.epochs; epoch++)
    for (int s = 0; s < steps_per_epoch; s++) {
      std::vector<Tensor> losses;
      const int lo = s * rcfg.batch_size;
      const int hi = std::min(num_items, lo + rcfg.batch_size);
      for (int i = lo; i < hi; i++) {
        auto [input, target] = example_stream(i);
        Tensor out = student_forward(input, res.student);
        losses.push_back(cosine_distill_loss(out, target));
      }
      Tensor loss = losses[0];
      for (size_t i = 1; i < losses.size(); i++) loss = add(loss, losses[i]);
      if (losses.size() > 1) loss = scale(loss, 1.0 / static_cast<double>(losses.size()));
      const double lv = scalar_value(loss);
      const int step_index = opt.step_count() + 1;
      if (!std::isfinite(lv))
        throw std::runtime_error("distill_train: non-finite loss at step " +
                                 std::to_string(step_index));
      backward(loss);
      const double lr = opt.step();
      res.history.push_back({step_index, lr, lv});
    }

  res.final_cosine = mean_cosine_similarity(res.student, example_stream, num_items);
  return res;
}

double mean_cosine_similarity(const StudentParams& student,
                              const ExampleStream& example_stream, int num_items) {
  if (num_items <= 0) throw std::runtime_error("mean_cosine_similarity: empty stream");
  double acc = 0.0;
  for (int i = 0; i < num_items; i++) {
    auto [input, target] = example_stream(i);
    acc += batch_cosine(student_forward(input, student), target);
  }
  return acc / num_items;
}

}  // namespace hop
