#include "hop/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace hop {

Params MhaParams::params(const std::string& prefix) const {
  return {
      {prefix + ".wq", wq}, {prefix + ".bq", bq}, {prefix + ".wk", wk},
      {prefix + ".bk", bk}, {prefix + ".wv", wv}, {prefix + ".bv", bv},
      {prefix + ".wo", wo}, {prefix + ".bo", bo},
  };
}

MhaParams make_mha_params(int dim, int heads, Rng& rng, bool zero_init_output) {
  if (dim <= 0 || heads <= 0 || dim % heads != 0)
    throw std::runtime_error("make_mha_params: dim " + std::to_string(dim) +
                             " not divisible by heads " + std::to_string(heads));
  MhaParams p;
  p.dim = dim;
  p.heads = heads;
  p.wq = trunc_normal_init({dim, dim}, rng, 0.02);
  p.wk = trunc_normal_init({dim, dim}, rng, 0.02);
  p.wv = trunc_normal_init({dim, dim}, rng, 0.02);
  p.wo = zero_init_output ? zeros({dim, dim}) : trunc_normal_init({dim, dim}, rng, 0.02);
  p.bq = zeros({dim});
  p.bk = zeros({dim});
  p.bv = zeros({dim});
  p.bo = zeros({dim});
  for (Tensor* t : {&p.wq, &p.bq, &p.wk, &p.bk, &p.wv, &p.bv, &p.wo, &p.bo})
    t->set_requires_grad();
  return p;
}

Tensor multi_head_attention(const Tensor& query, const Tensor& kv, const MhaParams& p) {
  if (query.rank() != 2 || kv.rank() != 2)
    throw std::runtime_error("multi_head_attention: want 2-D query and kv");
  if (query.dim(1) != p.dim || kv.dim(1) != p.dim)
    throw std::runtime_error("multi_head_attention: feature dim mismatch, got " +
                             shape_str(query.shape) + " and " + shape_str(kv.shape) +
                             " for dim " + std::to_string(p.dim));
  if (kv.dim(0) == 0) throw std::runtime_error("multi_head_attention: empty kv");

  const Tensor q = add_row_bias(matmul(query, p.wq), p.bq);
  const Tensor k = add_row_bias(matmul(kv, p.wk), p.bk);
  const Tensor v = add_row_bias(matmul(kv, p.wv), p.bv);

  const int hd = p.dim / p.heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<Tensor> heads;
  heads.reserve(p.heads);
  for (int h = 0; h < p.heads; h++) {
    const Tensor qh = slice_cols(q, h * hd, hd);
    const Tensor kh = slice_cols(k, h * hd, hd);
    const Tensor vh = slice_cols(v, h * hd, hd);
    const Tensor att = softmax(scale(matmul_nt(qh, kh), inv_sqrt), 1);
    heads.push_back(matmul(att, vh));
  }
  return add_row_bias(matmul(concat_cols(heads), p.wo), p.bo);
}

Tensor self_attention(const Tensor& x, const MhaParams& p) {
  return multi_head_attention(x, x, p);
}

}  // namespace hop
