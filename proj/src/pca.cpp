#include "hop/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hop {

void symmetric_eigen(const Tensor& m, Tensor& values, Tensor& vectors) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1))
    throw std::runtime_error("symmetric_eigen: want square matrix, got " + shape_str(m.shape));
  const int n = m.dim(0);
  std::vector<double> a(*m.data);
  std::vector<double> v(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; i++) v[static_cast<size_t>(i) * n + i] = 1.0;

  auto A = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * n + j]; };
  auto V = [&](int i, int j) -> double& { return v[static_cast<size_t>(i) * n + j]; };

  for (int sweep = 0; sweep < 100; sweep++) {
    double off = 0.0;
    for (int i = 0; i < n; i++)
      for (int j = i + 1; j < n; j++) off += A(i, j) * A(i, j);
    if (off < 1e-24) break;
    for (int p = 0; p < n - 1; p++)
      for (int q = p + 1; q < n; q++) {
        const double apq = A(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; k++) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; k++) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; k++) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return A(i, i) > A(j, j); });

  values = zeros({n});
  vectors = zeros({n, n});
  for (int c = 0; c < n; c++) {
    values.at(c) = A(order[c], order[c]);
    for (int r = 0; r < n; r++) vectors.at(r, c) = V(r, order[c]);
  }
}

PcaResult pca_project(const Tensor& x, int k) {
  if (x.rank() != 2) throw std::runtime_error("pca_project: want 2-D, got " + shape_str(x.shape));
  const int n = x.dim(0), d = x.dim(1);
  if (n < 2) throw std::runtime_error("pca_project: need at least 2 samples");
  if (k < 1 || k > std::min(n, d))
    throw std::runtime_error("pca_project: k=" + std::to_string(k) + " out of range for " +
                             shape_str(x.shape));

  PcaResult res;
  res.mean = zeros({d});
  for (int j = 0; j < d; j++) {
    double s = 0.0;
    for (int i = 0; i < n; i++) s += x.at(i, j);
    res.mean.at(j) = s / n;
  }

  Tensor cov = zeros({d, d});
  for (int i = 0; i < n; i++)
    for (int a = 0; a < d; a++) {
      const double ca = x.at(i, a) - res.mean.at(a);
      for (int b = a; b < d; b++) cov.at(a, b) += ca * (x.at(i, b) - res.mean.at(b));
    }
  for (int a = 0; a < d; a++)
    for (int b = a; b < d; b++) {
      cov.at(a, b) /= (n - 1);
      cov.at(b, a) = cov.at(a, b);
    }

  Tensor values, vectors;
  symmetric_eigen(cov, values, vectors);

  res.components = zeros({d, k});
  res.eigenvalues = zeros({k});
  for (int c = 0; c < k; c++) {
    res.eigenvalues.at(c) = values.at(c);
    int arg = 0;
    double best = 0.0;
    for (int r = 0; r < d; r++)
      if (std::fabs(vectors.at(r, c)) > best) {
        best = std::fabs(vectors.at(r, c));
        arg = r;
      }
    const double sign = vectors.at(arg, c) >= 0.0 ? 1.0 : -1.0;
    for (int r = 0; r < d; r++) res.components.at(r, c) = vectors.at(r, c) * sign;
  }

  res.projected = zeros({n, k});
  for (int i = 0; i < n; i++)
    for (int c = 0; c < k; c++) {
      double s = 0.0;
      for (int j = 0; j < d; j++) s += (x.at(i, j) - res.mean.at(j)) * res.components.at(j, c);
      res.projected.at(i, c) = s;
    }
  return res;
}

Tensor pca_color_map(const Tensor& tokens) {
  PcaResult res = pca_project(tokens, 3);
  const int n = tokens.dim(0);
  Tensor rgb = zeros({n, 3});
  for (int c = 0; c < 3; c++) {
    double lo = res.projected.at(0, c), hi = lo;
    for (int i = 1; i < n; i++) {
      lo = std::min(lo, res.projected.at(i, c));
      hi = std::max(hi, res.projected.at(i, c));
    }
    const double span = hi - lo;
    for (int i = 0; i < n; i++)
      rgb.at(i, c) = span < 1e-12 ? 0.5 : (res.projected.at(i, c) - lo) / span;
  }
  return rgb;
}

}  // namespace hop
