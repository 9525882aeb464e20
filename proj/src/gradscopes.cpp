#include "hop/gradscopes.hpp"
#include <algorithm>

#include <stdexcept>

#include "hop/attention.hpp"
#include "hop/fusion.hpp"
#include "hop/ops.hpp"
#include "hop/pipeline.hpp"
#include "hop/rng.hpp"
#include "hop/student.hpp"

namespace hop {

namespace {

constexpr std::uint64_t kScopeStream = 0x4743u;

double report_max_abs(const GradCheckReport& rep) {
  double m = 0.0;
  for (const auto& e : rep.entries) m = std::max(m, e.max_abs);
  return m;
}

// Fresh inits sit in a degenerate corner: weights at 0.02 leave most gradient
// coordinates near zero and the cosine loss near-zero norms, so the relative
// gap to central differences is all rounding noise. Checking at a generic
// point keeps the same code paths but O(1) gradients.
void shake(Params& ps, Rng& rng, double s) {
  for (Parameter& p : ps)
    for (double& v : *p.value.data) v += s * rng.normal();
}

GradScopeResult attention_case(std::uint64_t seed, double eps) {
  Rng rng(derive_seed(seed, kScopeStream));
  MhaParams mp = make_mha_params(8, 2, rng);
  Tensor q = randn({3, 8}, rng, 0.5);
  Tensor kv = randn({4, 8}, rng, 0.5);
  q.set_requires_grad();
  kv.set_requires_grad();
  Params params = mp.params("attn");
  shake(params, rng, 0.3);
  params.push_back({"q", q});
  params.push_back({"kv", kv});
  auto loss_fn = [&] {
    Tensor out = multi_head_attention(q, kv, mp);
    return sum_all(mul(out, out));
  };
  GradCheckReport rep = check_gradients(loss_fn, params, eps);
  return {"attention", seed, rep.max_rel, report_max_abs(rep)};
}

GradScopeResult fusion_case(FusionStrategy s, std::uint64_t seed, double eps) {
  Rng rng(derive_seed(seed, kScopeStream + 1));
  FusionParams fp = make_fusion_params(s, 8, 2, rng, /*zero_init_output=*/false);
  Tensor p = randn({3, 8}, rng, 0.5);
  Tensor h_a = randn({2, 8}, rng, 0.5);
  Tensor h_s = randn({2, 8}, rng, 0.5);
  Tensor h_q = randn({2, 8}, rng, 0.5);
  for (Tensor* t : {&p, &h_a, &h_s, &h_q}) t->set_requires_grad();
  Params params = fp.params("fusion");
  shake(params, rng, 0.3);
  params.push_back({"p", p});
  params.push_back({"h_a", h_a});
  params.push_back({"h_s", h_s});
  params.push_back({"h_q", h_q});
  auto loss_fn = [&] {
    Tensor fused = fuse(p, h_a, h_s, h_q, fp);
    return sum_all(mul(fused, fused));
  };
  GradCheckReport rep = check_gradients(loss_fn, params, eps);
  return {"fusion:" + format_fusion_strategy(s), seed, rep.max_rel, report_max_abs(rep)};
}

GradScopeResult distill_case(std::uint64_t seed, double eps) {
  Rng rng(derive_seed(seed, kScopeStream + 2));
  StudentDecoderConfig scfg;
  scfg.layers = 1;
  scfg.heads = 2;
  scfg.width = 8;
  scfg.ffn_ratio = 2;
  scfg.input_dim = 6;
  scfg.output_dim = 5;
  StudentParams sp = make_student_params(scfg, rng);
  Tensor x = randn({4, 6}, rng, 0.5);
  Tensor target = randn({4, 5}, rng, 1.0);
  Params params = sp.params();
  shake(params, rng, 0.3);
  auto loss_fn = [&] { return cosine_distill_loss(student_forward(x, sp), target); };
  GradCheckReport rep = check_gradients(loss_fn, params, eps);
  return {"distill", seed, rep.max_rel, report_max_abs(rep)};
}

GradScopeResult pipeline_case(std::uint64_t seed, double eps) {
  ToyModelConfig cfg;
  cfg.grid = 6;
  cfg.dims.d = 24;
  cfg.dims.d_aff = kAffDirCount;
  cfg.dims.d_sem = kSemDirCount;
  cfg.dims.d_text = 12;
  cfg.dims.heads = 4;
  cfg.dims.l = cfg.dims.n = 36;
  cfg.semantic_k = 3;
  cfg.num_distractors = 2;
  cfg.adapter_width = 8;
  cfg.affinity_source = static_cast<AffinitySource>(seed % 3);

  SceneConfig scfg;
  scfg.grid = 6;
  scfg.max_instances = 3;
  scfg.instance_size = 3;
  DatasetItem item;
  item.scene = generate_scene(derive_seed(seed, kScopeStream + 3), scfg);
  item.qa = make_qa(item.scene, QAKind::Count, derive_seed(seed, kScopeStream + 4));

  ToyModel model = make_toy_model(cfg, derive_seed(seed, kScopeStream + 5));
  if (cfg.affinity_source == AffinitySource::Student) {
    Rng rng(derive_seed(seed, kScopeStream + 6));
    StudentDecoderConfig st;
    st.layers = 1;
    st.heads = 2;
    st.width = 8;
    st.ffn_ratio = 2;
    st.input_dim = cfg.dims.d;
    st.output_dim = cfg.dims.d_aff;
    attach_student(model, make_student_params(st, rng));
  }
  Params params = model.params();
  auto loss_fn = [&] {
    return cross_entropy_logits(model_forward(model, item), {item.qa.answer});
  };
  GradCheckReport rep = check_gradients(loss_fn, params, eps, /*max_coords_per_param=*/12);
  return {"pipeline", seed, rep.max_rel, report_max_abs(rep)};
}

}  // namespace

const std::vector<std::string>& grad_scope_names() {
  static const std::vector<std::string> v = {"attention", "fusion", "distill", "pipeline"};
  return v;
}

std::vector<GradScopeResult> run_grad_scope(const std::string& scope, int seeds, double eps) {
  if (seeds <= 0) throw std::runtime_error("run_grad_scope: seeds must be positive");
  std::vector<GradScopeResult> out;
  for (int s = 0; s < seeds; s++) {
    const auto seed = static_cast<std::uint64_t>(s + 1);
    if (scope == "attention") {
      out.push_back(attention_case(seed, eps));
    } else if (scope == "fusion") {
      for (FusionStrategy st :
           {FusionStrategy::Concatenation, FusionStrategy::SelfCross, FusionStrategy::Joint,
            FusionStrategy::Sequential, FusionStrategy::Parallel})
        out.push_back(fusion_case(st, seed, eps));
    } else if (scope == "distill") {
      out.push_back(distill_case(seed, eps));
    } else if (scope == "pipeline") {
      out.push_back(pipeline_case(seed, eps));
    } else {
      throw std::runtime_error("run_grad_scope: unknown scope '" + scope + "'");
    }
  }
  return out;
}

}  // namespace hop
