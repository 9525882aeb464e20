#include "hop/fusion.hpp"

#include <stdexcept>

namespace hop {

FusionStrategy parse_fusion_strategy(const std::string& s) {
  if (s == "concat") return FusionStrategy::Concatenation;
  if (s == "self-cross") return FusionStrategy::SelfCross;
  if (s == "joint") return FusionStrategy::Joint;
  if (s == "sequential") return FusionStrategy::Sequential;
  if (s == "parallel") return FusionStrategy::Parallel;
  throw std::runtime_error("parse_fusion_strategy: unknown strategy '" + s + "'");
}

std::string format_fusion_strategy(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::Concatenation: return "concat";
    case FusionStrategy::SelfCross: return "self-cross";
    case FusionStrategy::Joint: return "joint";
    case FusionStrategy::Sequential: return "sequential";
    case FusionStrategy::Parallel: return "parallel";
  }
  throw std::runtime_error("format_fusion_strategy: bad enum");
}

int fusion_attention_layers(FusionStrategy s) {
  switch (s) {
    case FusionStrategy::Concatenation: return 0;
    case FusionStrategy::SelfCross: return 2;
    case FusionStrategy::Joint: return 1;
    case FusionStrategy::Sequential: return 3;
    case FusionStrategy::Parallel: return 3;
  }
  throw std::runtime_error("fusion_attention_layers: bad enum");
}

Params FusionParams::params(const std::string& prefix) const {
  Params out;
  for (size_t i = 0; i < attn.size(); i++) {
    Params layer = attn[i].params(prefix + ".attn" + std::to_string(i));
    out.insert(out.end(), layer.begin(), layer.end());
  }
  return out;
}

FusionParams make_fusion_params(FusionStrategy s, int dim, int heads, Rng& rng,
                                bool zero_init_output) {
  FusionParams p;
  p.strategy = s;
  p.dim = dim;
  p.heads = heads;
  const int layers = fusion_attention_layers(s);
  p.attn.reserve(layers);
  for (int i = 0; i < layers; i++)
    p.attn.push_back(make_mha_params(dim, heads, rng, zero_init_output));
  return p;
}

namespace {

Tensor require_rows(Tensor kv, const char* what) {
  if (kv.dim(0) == 0)
    throw std::runtime_error(std::string("fuse: ") + what +
                             " needs at least one key-value row; enable a hint or "
                             "switch to the joint strategy");
  return kv;
}

std::vector<Tensor> with_rows(std::initializer_list<Tensor> parts) {
  std::vector<Tensor> out;
  for (const Tensor& t : parts)
    if (t.dim(0) > 0) out.push_back(t);
  return out;
}

// Concatenation of the non-empty parts; caller checks emptiness where needed.
Tensor cat_nonempty(std::initializer_list<Tensor> parts, const Tensor& fallback) {
  std::vector<Tensor> keep = with_rows(parts);
  if (keep.empty()) return zeros({0, fallback.dim(1)});
  if (keep.size() == 1) return keep[0];
  return concat_rows(keep);
}

}  // namespace

std::vector<AssembledCall> fused_kv_assembly(const Tensor& p, const Tensor& h_a,
                                             const Tensor& h_s, const Tensor& h_q,
                                             const FusionParams& params) {
  for (const Tensor* t : {&p, &h_a, &h_s, &h_q})
    if (t->rank() != 2 || t->dim(1) != params.dim)
      throw std::runtime_error("fuse: input " + shape_str(t->shape) +
                               " does not match model dim " + std::to_string(params.dim));
  if (p.dim(0) == 0) throw std::runtime_error("fuse: no visual tokens");
  if (static_cast<int>(params.attn.size()) != fusion_attention_layers(params.strategy))
    throw std::runtime_error("fuse: params carry " + std::to_string(params.attn.size()) +
                             " attention layers, strategy needs " +
                             std::to_string(fusion_attention_layers(params.strategy)));

  std::vector<AssembledCall> calls;
  switch (params.strategy) {
    case FusionStrategy::Concatenation:
      break;
    case FusionStrategy::SelfCross: {
      AssembledCall sa;
      sa.query = p;
      sa.kv = p;
      sa.self = true;
      sa.out = multi_head_attention(sa.query, sa.kv, params.attn[0]);
      calls.push_back(sa);
      AssembledCall ca;
      ca.query = calls[0].out;
      ca.kv = require_rows(cat_nonempty({h_a, h_s, h_q}, p), "self-cross attention");
      ca.out = multi_head_attention(ca.query, ca.kv, params.attn[1]);
      calls.push_back(ca);
      break;
    }
    case FusionStrategy::Joint: {
      AssembledCall ca;
      ca.query = p;
      ca.kv = cat_nonempty({p, h_a, h_s, h_q}, p);
      ca.out = multi_head_attention(ca.query, ca.kv, params.attn[0]);
      calls.push_back(ca);
      break;
    }
    case FusionStrategy::Sequential: {
      const Tensor* hints[3] = {&h_a, &h_s, &h_q};
      const char* names[3] = {"sequential affinity stage", "sequential semantic stage",
                              "sequential question stage"};
      Tensor q = p;
      for (int i = 0; i < 3; i++) {
        AssembledCall ca;
        ca.query = q;
        ca.kv = require_rows(*hints[i], names[i]);
        ca.out = multi_head_attention(ca.query, ca.kv, params.attn[i]);
        q = ca.out;
        calls.push_back(ca);
      }
      break;
    }
    case FusionStrategy::Parallel: {
      const Tensor* hints[3] = {&h_a, &h_s, &h_q};
      const char* names[3] = {"parallel affinity branch", "parallel semantic branch",
                              "parallel question branch"};
      for (int i = 0; i < 3; i++) {
        AssembledCall ca;
        ca.query = p;
        ca.kv = require_rows(*hints[i], names[i]);
        ca.out = multi_head_attention(ca.query, ca.kv, params.attn[i]);
        calls.push_back(ca);
      }
      break;
    }
  }
  return calls;
}

std::vector<AttentionCall> fusion_wiring(int l, int n, int m, int k, FusionStrategy s) {
  switch (s) {
    case FusionStrategy::Concatenation:
      return {};
    case FusionStrategy::SelfCross:
      return {{l, l, true}, {l, n + m + k, false}};
    case FusionStrategy::Joint:
      return {{l, l + n + m + k, false}};
    case FusionStrategy::Sequential:
      return {{l, n, false}, {l, m, false}, {l, k, false}};
    case FusionStrategy::Parallel:
      return {{l, n, false}, {l, m, false}, {l, k, false}};
  }
  throw std::runtime_error("fusion_wiring: bad enum");
}

Tensor fuse(const Tensor& p, const Tensor& h_a, const Tensor& h_s, const Tensor& h_q,
            const FusionParams& params) {
  if (params.strategy == FusionStrategy::Concatenation) {
    fused_kv_assembly(p, h_a, h_s, h_q, params);  // input validation only
    std::vector<Tensor> keep = {p};
    for (const Tensor* t : {&h_a, &h_s, &h_q})
      if (t->dim(0) > 0) keep.push_back(*t);
    return keep.size() == 1 ? p : concat_rows(keep);
  }
  std::vector<AssembledCall> calls = fused_kv_assembly(p, h_a, h_s, h_q, params);
  Tensor out = p;
  if (params.strategy == FusionStrategy::Parallel) {
    for (const AssembledCall& c : calls) out = add(out, c.out);
  } else {
    out = add(out, calls.back().out);
  }
  return out;
}

}  // namespace hop
