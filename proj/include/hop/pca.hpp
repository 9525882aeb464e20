#pragma once

#include "hop/tensor.hpp"

namespace hop {

struct PcaResult {
  Tensor components;   // [d,k], columns are orthonormal principal directions
  Tensor eigenvalues;  // [k], descending
  Tensor mean;         // [d]
  Tensor projected;    // [n,k]
};

// Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.
// Returns eigenvalues (descending) and matching orthonormal columns.
void symmetric_eigen(const Tensor& m, Tensor& values, Tensor& vectors);

// Classic PCA of row-sample data: mean-center, covariance (n-1 denominator),
// top-k eigenpairs. Column signs are fixed so the largest-magnitude entry of
// each component is positive. Requires 1 <= k <= min(n, d) and n >= 2.
PcaResult pca_project(const Tensor& x, int k);

// Maps tokens to RGB in [0,1]^3 by projecting onto the top three principal
// directions and min-max scaling each channel. A channel with no spread maps
// to 0.5. Returns [n,3].
Tensor pca_color_map(const Tensor& tokens);

}  // namespace hop
