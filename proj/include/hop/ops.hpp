#pragma once

#include "hop/tensor.hpp"

namespace hop {

// Differentiable ops over 2-D tensors unless noted. Shape errors throw.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);

Tensor matmul(const Tensor& a, const Tensor& b);     // [m,k]x[k,n]
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // a * b^T, [m,k]x[n,k]
Tensor transpose(const Tensor& a);

Tensor add_row_bias(const Tensor& x, const Tensor& b);  // [n,d] + [d]

// Softmax along the given axis of an arbitrary-rank tensor.
Tensor softmax(const Tensor& x, int axis);

// Per-row normalization of a 2-D tensor with learnable gain/shift [d].
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);

Tensor concat_rows(const std::vector<Tensor>& parts);  // same column count
Tensor concat_cols(const std::vector<Tensor>& parts);  // same row count
Tensor slice_rows(const Tensor& x, int start, int len);
Tensor slice_cols(const Tensor& x, int start, int len);

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids);

Tensor mean_rows(const Tensor& x);  // [n,d] -> [1,d]
Tensor sum_all(const Tensor& x);    // -> [1]

Tensor gelu(const Tensor& x);  // exact erf form

// Mean cross entropy of row-wise softmax(logits) against integer labels.
Tensor cross_entropy_logits(const Tensor& logits, const std::vector<int>& labels);

// mean_i (1 - cos(student_i, teacher_i)) over rows. Student rows with norm
// below 1e-12 are clamped; a zero-norm teacher row is an error.
Tensor cosine_distill_loss(const Tensor& student, const Tensor& teacher);

}  // namespace hop
