#include <doctest.h>

#include <cmath>
#include <vector>

#include "hop/attention.hpp"
#include "hop/grad_check.hpp"
#include "hop/rng.hpp"

using namespace hop;

namespace {

// plain-loop reference: dense projections, per-head scaled dot product,
// row softmax, weighted sum, output projection
std::vector<double> mha_ref(const Tensor& query, const Tensor& kv, const MhaParams& p) {
  const int lq = query.dim(0), lk = kv.dim(0), d = p.dim, heads = p.heads, hd = d / heads;
  auto project = [d](const Tensor& x, const Tensor& w, const Tensor& b) {
    std::vector<double> out(static_cast<size_t>(x.dim(0)) * d);
    for (int i = 0; i < x.dim(0); i++)
      for (int j = 0; j < d; j++) {
        double acc = b.at(j);
        for (int c = 0; c < d; c++) acc += x.at(i, c) * w.at(c, j);
        out[i * d + j] = acc;
      }
    return out;
  };
  std::vector<double> q = project(query, p.wq, p.bq);
  std::vector<double> k = project(kv, p.wk, p.bk);
  std::vector<double> v = project(kv, p.wv, p.bv);

  std::vector<double> mixed(static_cast<size_t>(lq) * d);
  for (int h = 0; h < heads; h++) {
    const int off = h * hd;
    for (int i = 0; i < lq; i++) {
      std::vector<double> row(lk);
      double mx = -1e300;
      for (int j = 0; j < lk; j++) {
        double s = 0;
        for (int c = 0; c < hd; c++) s += q[i * d + off + c] * k[j * d + off + c];
        row[j] = s / std::sqrt(static_cast<double>(hd));
        mx = std::max(mx, row[j]);
      }
      double z = 0;
      for (int j = 0; j < lk; j++) {
        row[j] = std::exp(row[j] - mx);
        z += row[j];
      }
      for (int c = 0; c < hd; c++) {
        double acc = 0;
        for (int j = 0; j < lk; j++) acc += row[j] / z * v[j * d + off + c];
        mixed[i * d + off + c] = acc;
      }
    }
  }

  std::vector<double> out(static_cast<size_t>(lq) * d);
  for (int i = 0; i < lq; i++)
    for (int j = 0; j < d; j++) {
      double acc = p.bo.at(j);
      for (int c = 0; c < d; c++) acc += mixed[i * d + c] * p.wo.at(c, j);
      out[i * d + j] = acc;
    }
  return out;
}

}  // namespace

TEST_CASE("multi_head_attention matches the loop reference") {
  Rng rng(51);
  for (int trial = 0; trial < 30; trial++) {
    const int heads = rng.uniform_int(1, 4);
    const int d = heads * rng.uniform_int(1, 5);
    const int lq = rng.uniform_int(1, 6), lk = rng.uniform_int(1, 7);
    MhaParams p = make_mha_params(d, heads, rng, false);
    // nudge biases off zero so their paths are exercised too
    for (Tensor* b : {&p.bq, &p.bk, &p.bv, &p.bo})
      for (auto& x : *b->data) x = rng.normal() * 0.1;
    Tensor query = randn({lq, d}, rng, 1.0), kv = randn({lk, d}, rng, 1.0);
    Tensor out = multi_head_attention(query, kv, p);
    REQUIRE(out.shape == std::vector<int>{lq, d});
    auto ref = mha_ref(query, kv, p);
    double m = 0;
    for (size_t i = 0; i < ref.size(); i++) m = std::max(m, std::fabs((*out.data)[i] - ref[i]));
    CHECK(m < 1e-10);
  }
}

TEST_CASE("attention shape and emptiness errors") {
  Rng rng(52);
  MhaParams p = make_mha_params(8, 2, rng);
  CHECK_THROWS(multi_head_attention(randn({3, 6}, rng, 1.0), randn({4, 8}, rng, 1.0), p));
  CHECK_THROWS(multi_head_attention(randn({3, 8}, rng, 1.0), zeros({0, 8}), p));
  CHECK_THROWS(make_mha_params(10, 3, rng));

  Tensor x = randn({4, 8}, rng, 1.0);
  Tensor self1 = self_attention(x, p);
  Tensor self2 = multi_head_attention(x, x, p);
  for (size_t i = 0; i < self1.numel(); i++) CHECK((*self1.data)[i] == (*self2.data)[i]);
}

TEST_CASE("zero-init output projection silences the block") {
  Rng rng(53);
  MhaParams p = make_mha_params(8, 2, rng, true);
  Tensor out = multi_head_attention(randn({5, 8}, rng, 1.0), randn({3, 8}, rng, 1.0), p);
  for (double v : *out.data) CHECK(v == 0.0);
}

TEST_CASE("single kv row attends to it exactly") {
  Rng rng(54);
  MhaParams p = make_mha_params(6, 3, rng, false);
  Tensor query = randn({4, 6}, rng, 1.0);
  Tensor kv = randn({1, 6}, rng, 1.0);
  Tensor out = multi_head_attention(query, kv, p);
  // with one key the softmax is 1, so the result ignores the query values
  Tensor q2 = randn({4, 6}, rng, 1.0);
  Tensor out2 = multi_head_attention(q2, kv, p);
  for (size_t i = 0; i < out.numel(); i++)
    CHECK((*out.data)[i] == doctest::Approx((*out2.data)[i]).epsilon(1e-13));
}

TEST_CASE("attention params gradient-check clean") {
  Rng rng(55);
  MhaParams p = make_mha_params(6, 2, rng, false);
  Tensor query = randn({3, 6}, rng, 0.7);
  Tensor kv = randn({4, 6}, rng, 0.7);
  query.set_requires_grad();
  kv.set_requires_grad();
  Params params = p.params("attn");
  params.push_back({"query", query});
  params.push_back({"kv", kv});
  auto loss_fn = [&] {
    Tensor out = multi_head_attention(query, kv, p);
    return sum_all(mul(out, out));
  };
  GradCheckReport rep = check_gradients(loss_fn, params, 1e-5);
  CHECK(rep.max_rel < 1e-6);
}
