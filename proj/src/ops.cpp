#include "hop/ops.hpp"

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hop {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<EMat>;
using CMapM = Eigen::Map<const EMat>;

void need_rank2(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw std::runtime_error(std::string(op) + ": want 2-D, got " +
                                              shape_str(t.shape));
}

bool want_grad(std::initializer_list<const Tensor*> ts) {
  for (const Tensor* t : ts)
    if (t->requires_grad) return true;
  return false;
}

Tensor op_out(std::vector<int> shape, bool grad) {
  Tensor t = zeros(std::move(shape));
  if (grad) t.set_requires_grad();
  return t;
}

void attach(Tensor& out, const char* op, std::vector<Tensor> parents,
            std::function<void()> fn) {
  if (!out.requires_grad) return;
  out.node = std::make_shared<Node>();
  out.node->op = op;
  out.node->parents = std::move(parents);
  out.node->backprop = std::move(fn);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape)
    throw std::runtime_error("add: shape mismatch " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
  Tensor out = op_out(a.shape, want_grad({&a, &b}));
  const size_t n = a.numel();
  for (size_t i = 0; i < n; i++) (*out.data)[i] = (*a.data)[i] + (*b.data)[i];
  attach(out, "add", {a, b}, [a, b, out, n]() {
    if (a.requires_grad)
      for (size_t i = 0; i < n; i++) (*a.grad)[i] += (*out.grad)[i];
    if (b.requires_grad)
      for (size_t i = 0; i < n; i++) (*b.grad)[i] += (*out.grad)[i];
  });
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape)
    throw std::runtime_error("sub: shape mismatch " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
  Tensor out = op_out(a.shape, want_grad({&a, &b}));
  const size_t n = a.numel();
  for (size_t i = 0; i < n; i++) (*out.data)[i] = (*a.data)[i] - (*b.data)[i];
  attach(out, "sub", {a, b}, [a, b, out, n]() {
    if (a.requires_grad)
      for (size_t i = 0; i < n; i++) (*a.grad)[i] += (*out.grad)[i];
    if (b.requires_grad)
      for (size_t i = 0; i < n; i++) (*b.grad)[i] -= (*out.grad)[i];
  });
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape != b.shape)
    throw std::runtime_error("mul: shape mismatch " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
  Tensor out = op_out(a.shape, want_grad({&a, &b}));
  const size_t n = a.numel();
  for (size_t i = 0; i < n; i++) (*out.data)[i] = (*a.data)[i] * (*b.data)[i];
  attach(out, "mul", {a, b}, [a, b, out, n]() {
    if (a.requires_grad)
      for (size_t i = 0; i < n; i++) (*a.grad)[i] += (*out.grad)[i] * (*b.data)[i];
    if (b.requires_grad)
      for (size_t i = 0; i < n; i++) (*b.grad)[i] += (*out.grad)[i] * (*a.data)[i];
  });
  return out;
}

Tensor scale(const Tensor& a, double c) {
  Tensor out = op_out(a.shape, a.requires_grad);
  const size_t n = a.numel();
  for (size_t i = 0; i < n; i++) (*out.data)[i] = (*a.data)[i] * c;
  attach(out, "scale", {a}, [a, out, c, n]() {
    for (size_t i = 0; i < n; i++) (*a.grad)[i] += (*out.grad)[i] * c;
  });
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  need_rank2(a, "matmul");
  need_rank2(b, "matmul");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    throw std::runtime_error("matmul: inner mismatch " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
  Tensor out = op_out({m, n}, want_grad({&a, &b}));
  if (m > 0 && k > 0 && n > 0)
    MapM(out.ptr(), m, n).noalias() = CMapM(a.ptr(), m, k) * CMapM(b.ptr(), k, n);
  attach(out, "matmul", {a, b}, [a, b, out, m, k, n]() {
    if (m == 0 || n == 0) return;
    CMapM dc(out.grad->data(), m, n);
    if (a.requires_grad && k > 0)
      MapM(a.grad->data(), m, k).noalias() += dc * CMapM(b.ptr(), k, n).transpose();
    if (b.requires_grad && k > 0)
      MapM(b.grad->data(), k, n).noalias() += CMapM(a.ptr(), m, k).transpose() * dc;
  });
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  need_rank2(a, "matmul_nt");
  need_rank2(b, "matmul_nt");
  const int m = a.dim(0), k = a.dim(1), n = b.dim(0);
  if (b.dim(1) != k)
    throw std::runtime_error("matmul_nt: inner mismatch " + shape_str(a.shape) + " vs " +
                             shape_str(b.shape));
  Tensor out = op_out({m, n}, want_grad({&a, &b}));
  if (m > 0 && k > 0 && n > 0)
    MapM(out.ptr(), m, n).noalias() =
        CMapM(a.ptr(), m, k) * CMapM(b.ptr(), n, k).transpose();
  attach(out, "matmul_nt", {a, b}, [a, b, out, m, k, n]() {
    if (m == 0 || n == 0 || k == 0) return;
    CMapM dc(out.grad->data(), m, n);
    if (a.requires_grad)
      MapM(a.grad->data(), m, k).noalias() += dc * CMapM(b.ptr(), n, k);
    if (b.requires_grad)
      MapM(b.grad->data(), n, k).noalias() += dc.transpose() * CMapM(a.ptr(), m, k);
  });
  return out;
}

Tensor transpose(const Tensor& a) {
  need_rank2(a, "transpose");
  const int m = a.dim(0), n = a.dim(1);
  Tensor out = op_out({n, m}, a.requires_grad);
  for (int i = 0; i < m; i++)
    for (int j = 0; j < n; j++) out.at(j, i) = a.at(i, j);
  attach(out, "transpose", {a}, [a, out, m, n]() {
    for (int i = 0; i < m; i++)
      for (int j = 0; j < n; j++)
        (*a.grad)[static_cast<size_t>(i) * n + j] +=
            (*out.grad)[static_cast<size_t>(j) * m + i];
  });
  return out;
}

Tensor add_row_bias(const Tensor& x, const Tensor& b) {
  need_rank2(x, "add_row_bias");
  if (b.rank() != 1 || b.dim(0) != x.dim(1))
    throw std::runtime_error("add_row_bias: bias " + shape_str(b.shape) +
                             " does not match " + shape_str(x.shape));
  const int n = x.dim(0), d = x.dim(1);
  Tensor out = op_out(x.shape, want_grad({&x, &b}));
  for (int i = 0; i < n; i++)
    for (int j = 0; j < d; j++) out.at(i, j) = x.at(i, j) + b.at(j);
  attach(out, "add_row_bias", {x, b}, [x, b, out, n, d]() {
    if (x.requires_grad) {
      const size_t total = static_cast<size_t>(n) * d;
      for (size_t i = 0; i < total; i++) (*x.grad)[i] += (*out.grad)[i];
    }
    if (b.requires_grad)
      for (int i = 0; i < n; i++)
        for (int j = 0; j < d; j++) (*b.grad)[j] += (*out.grad)[static_cast<size_t>(i) * d + j];
  });
  return out;
}

Tensor softmax(const Tensor& x, int axis) {
  if (axis < 0 || axis >= x.rank())
    throw std::runtime_error("softmax: axis " + std::to_string(axis) + " out of range for " +
                             shape_str(x.shape));
  check_finite(x, "softmax");
  const int K = x.dim(axis);
  size_t outer = 1, inner = 1;
  for (int i = 0; i < axis; i++) outer *= static_cast<size_t>(x.dim(i));
  for (int i = axis + 1; i < x.rank(); i++) inner *= static_cast<size_t>(x.dim(i));
  Tensor out = op_out(x.shape, x.requires_grad);
  const double* xs = x.ptr();
  double* os = out.ptr();
  for (size_t o = 0; o < outer; o++)
    for (size_t in = 0; in < inner; in++) {
      const size_t base = o * K * inner + in;
      double mx = -1e308;
      for (int k = 0; k < K; k++) mx = std::max(mx, xs[base + k * inner]);
      double sum = 0.0;
      for (int k = 0; k < K; k++) {
        double e = std::exp(xs[base + k * inner] - mx);
        os[base + k * inner] = e;
        sum += e;
      }
      for (int k = 0; k < K; k++) os[base + k * inner] /= sum;
    }
  attach(out, "softmax", {x}, [x, out, K, outer, inner]() {
    const double* s = out.ptr();
    const double* dy = out.grad->data();
    double* dx = x.grad->data();
    for (size_t o = 0; o < outer; o++)
      for (size_t in = 0; in < inner; in++) {
        const size_t base = o * K * inner + in;
        double dot = 0.0;
        for (int k = 0; k < K; k++) dot += dy[base + k * inner] * s[base + k * inner];
        for (int k = 0; k < K; k++)
          dx[base + k * inner] += s[base + k * inner] * (dy[base + k * inner] - dot);
      }
  });
  return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  need_rank2(x, "layer_norm");
  const int n = x.dim(0), d = x.dim(1);
  if (gamma.rank() != 1 || gamma.dim(0) != d || beta.rank() != 1 || beta.dim(0) != d)
    throw std::runtime_error("layer_norm: gain/shift must be [" + std::to_string(d) + "]");
  if (d == 0) throw std::runtime_error("layer_norm: zero width");
  Tensor out = op_out(x.shape, want_grad({&x, &gamma, &beta}));
  // Cache xhat and inverse stddev for the backward pass.
  auto xhat = std::make_shared<std::vector<double>>(static_cast<size_t>(n) * d);
  auto istd = std::make_shared<std::vector<double>>(static_cast<size_t>(n));
  for (int i = 0; i < n; i++) {
    double mean = 0.0;
    for (int j = 0; j < d; j++) mean += x.at(i, j);
    mean /= d;
    double var = 0.0;
    for (int j = 0; j < d; j++) {
      double c = x.at(i, j) - mean;
      var += c * c;
    }
    var /= d;
    double is = 1.0 / std::sqrt(var + eps);
    (*istd)[i] = is;
    for (int j = 0; j < d; j++) {
      double h = (x.at(i, j) - mean) * is;
      (*xhat)[static_cast<size_t>(i) * d + j] = h;
      out.at(i, j) = h * gamma.at(j) + beta.at(j);
    }
  }
  attach(out, "layer_norm", {x, gamma, beta}, [x, gamma, beta, out, xhat, istd, n, d]() {
    for (int i = 0; i < n; i++) {
      const double is = (*istd)[i];
      double sum_g = 0.0, sum_gh = 0.0;
      for (int j = 0; j < d; j++) {
        const double dy = (*out.grad)[static_cast<size_t>(i) * d + j];
        const double h = (*xhat)[static_cast<size_t>(i) * d + j];
        const double g = dy * gamma.at(j);
        sum_g += g;
        sum_gh += g * h;
        if (gamma.requires_grad) (*gamma.grad)[j] += dy * h;
        if (beta.requires_grad) (*beta.grad)[j] += dy;
      }
      if (x.requires_grad)
        for (int j = 0; j < d; j++) {
          const double dy = (*out.grad)[static_cast<size_t>(i) * d + j];
          const double h = (*xhat)[static_cast<size_t>(i) * d + j];
          const double g = dy * gamma.at(j);
          (*x.grad)[static_cast<size_t>(i) * d + j] +=
              is * (g - sum_g / d - h * sum_gh / d);
        }
    }
  });
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::runtime_error("concat_rows: no inputs");
  int cols = -1;
  int rows = 0;
  bool grad = false;
  for (const Tensor& p : parts) {
    if (p.rank() != 2) throw std::runtime_error("concat_rows: want 2-D, got " + shape_str(p.shape));
    if (cols < 0) cols = p.dim(1);
    if (p.dim(1) != cols)
      throw std::runtime_error("concat_rows: column mismatch " + shape_str(p.shape));
    rows += p.dim(0);
    grad = grad || p.requires_grad;
  }
  Tensor out = op_out({rows, cols}, grad);
  size_t off = 0;
  for (const Tensor& p : parts) {
    const size_t n = p.numel();
    for (size_t i = 0; i < n; i++) (*out.data)[off + i] = (*p.data)[i];
    off += n;
  }
  attach(out, "concat_rows", parts, [parts, out]() {
    size_t off = 0;
    for (const Tensor& p : parts) {
      const size_t n = p.numel();
      if (p.requires_grad)
        for (size_t i = 0; i < n; i++) (*p.grad)[i] += (*out.grad)[off + i];
      off += n;
    }
  });
  return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw std::runtime_error("concat_cols: no inputs");
  int rows = -1;
  int cols = 0;
  bool grad = false;
  for (const Tensor& p : parts) {
    if (p.rank() != 2) throw std::runtime_error("concat_cols: want 2-D, got " + shape_str(p.shape));
    if (rows < 0) rows = p.dim(0);
    if (p.dim(0) != rows)
      throw std::runtime_error("concat_cols: row mismatch " + shape_str(p.shape));
    cols += p.dim(1);
    grad = grad || p.requires_grad;
  }
  Tensor out = op_out({rows, cols}, grad);
  int coff = 0;
  for (const Tensor& p : parts) {
    const int pc = p.dim(1);
    for (int i = 0; i < rows; i++)
      for (int j = 0; j < pc; j++) out.at(i, coff + j) = p.at(i, j);
    coff += pc;
  }
  attach(out, "concat_cols", parts, [parts, out, rows, cols]() {
    int coff = 0;
    for (const Tensor& p : parts) {
      const int pc = p.dim(1);
      if (p.requires_grad)
        for (int i = 0; i < rows; i++)
          for (int j = 0; j < pc; j++)
            (*p.grad)[static_cast<size_t>(i) * pc + j] +=
                (*out.grad)[static_cast<size_t>(i) * cols + coff + j];
      coff += pc;
    }
  });
  return out;
}

Tensor slice_rows(const Tensor& x, int start, int len) {
  need_rank2(x, "slice_rows");
  if (start < 0 || len < 0 || start + len > x.dim(0))
    throw std::runtime_error("slice_rows: range [" + std::to_string(start) + "," +
                             std::to_string(start + len) + ") out of " + shape_str(x.shape));
  const int d = x.dim(1);
  Tensor out = op_out({len, d}, x.requires_grad);
  for (int i = 0; i < len; i++)
    for (int j = 0; j < d; j++) out.at(i, j) = x.at(start + i, j);
  attach(out, "slice_rows", {x}, [x, out, start, len, d]() {
    for (int i = 0; i < len; i++)
      for (int j = 0; j < d; j++)
        (*x.grad)[static_cast<size_t>(start + i) * d + j] +=
            (*out.grad)[static_cast<size_t>(i) * d + j];
  });
  return out;
}

Tensor slice_cols(const Tensor& x, int start, int len) {
  need_rank2(x, "slice_cols");
  if (start < 0 || len < 0 || start + len > x.dim(1))
    throw std::runtime_error("slice_cols: range [" + std::to_string(start) + "," +
                             std::to_string(start + len) + ") out of " + shape_str(x.shape));
  const int n = x.dim(0), d = x.dim(1);
  Tensor out = op_out({n, len}, x.requires_grad);
  for (int i = 0; i < n; i++)
    for (int j = 0; j < len; j++) out.at(i, j) = x.at(i, start + j);
  attach(out, "slice_cols", {x}, [x, out, start, len, n, d]() {
    for (int i = 0; i < n; i++)
      for (int j = 0; j < len; j++)
        (*x.grad)[static_cast<size_t>(i) * d + start + j] +=
            (*out.grad)[static_cast<size_t>(i) * len + j];
  });
  return out;
}

Tensor gather_rows(const Tensor& table, const std::vector<int>& ids) {
  need_rank2(table, "gather_rows");
  const int rows = table.dim(0), d = table.dim(1);
  for (int id : ids)
    if (id < 0 || id >= rows)
      throw std::runtime_error("gather_rows: id " + std::to_string(id) + " out of " +
                               std::to_string(rows));
  const int n = static_cast<int>(ids.size());
  Tensor out = op_out({n, d}, table.requires_grad);
  for (int i = 0; i < n; i++)
    for (int j = 0; j < d; j++) out.at(i, j) = table.at(ids[i], j);
  attach(out, "gather_rows", {table}, [table, out, ids, n, d]() {
    for (int i = 0; i < n; i++)
      for (int j = 0; j < d; j++)
        (*table.grad)[static_cast<size_t>(ids[i]) * d + j] +=
            (*out.grad)[static_cast<size_t>(i) * d + j];
  });
  return out;
}

Tensor mean_rows(const Tensor& x) {
  need_rank2(x, "mean_rows");
  const int n = x.dim(0), d = x.dim(1);
  if (n == 0) throw std::runtime_error("mean_rows: empty input");
  Tensor out = op_out({1, d}, x.requires_grad);
  for (int j = 0; j < d; j++) {
    double s = 0.0;
    for (int i = 0; i < n; i++) s += x.at(i, j);
    out.at(0, j) = s / n;
  }
  attach(out, "mean_rows", {x}, [x, out, n, d]() {
    for (int i = 0; i < n; i++)
      for (int j = 0; j < d; j++)
        (*x.grad)[static_cast<size_t>(i) * d + j] += (*out.grad)[j] / n;
  });
  return out;
}

Tensor sum_all(const Tensor& x) {
  Tensor out = op_out({1}, x.requires_grad);
  double s = 0.0;
  for (double v : *x.data) s += v;
  (*out.data)[0] = s;
  attach(out, "sum_all", {x}, [x, out]() {
    const double dy = (*out.grad)[0];
    for (auto& g : *x.grad) g += dy;
  });
  return out;
}

Tensor gelu(const Tensor& x) {
  Tensor out = op_out(x.shape, x.requires_grad);
  const size_t n = x.numel();
  constexpr double inv_sqrt2 = 0.7071067811865476;
  for (size_t i = 0; i < n; i++) {
    const double v = (*x.data)[i];
    (*out.data)[i] = 0.5 * v * (1.0 + std::erf(v * inv_sqrt2));
  }
  attach(out, "gelu", {x}, [x, out, n]() {
    constexpr double inv_sqrt2 = 0.7071067811865476;
    constexpr double inv_sqrt2pi = 0.3989422804014327;
    for (size_t i = 0; i < n; i++) {
      const double v = (*x.data)[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * inv_sqrt2));
      const double pdf = inv_sqrt2pi * std::exp(-0.5 * v * v);
      (*x.grad)[i] += (*out.grad)[i] * (cdf + v * pdf);
    }
  });
  return out;
}

Tensor cross_entropy_logits(const Tensor& logits, const std::vector<int>& labels) {
  need_rank2(logits, "cross_entropy_logits");
  const int n = logits.dim(0), c = logits.dim(1);
  if (static_cast<int>(labels.size()) != n)
    throw std::runtime_error("cross_entropy_logits: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(n) + " rows");
  if (n == 0) throw std::runtime_error("cross_entropy_logits: empty batch");
  for (int l : labels)
    if (l < 0 || l >= c) throw std::runtime_error("cross_entropy_logits: label out of range");
  Tensor out = op_out({1}, logits.requires_grad);
  auto probs = std::make_shared<std::vector<double>>(static_cast<size_t>(n) * c);
  double loss = 0.0;
  for (int i = 0; i < n; i++) {
    double mx = -1e308;
    for (int j = 0; j < c; j++) mx = std::max(mx, logits.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < c; j++) {
      double e = std::exp(logits.at(i, j) - mx);
      (*probs)[static_cast<size_t>(i) * c + j] = e;
      sum += e;
    }
    for (int j = 0; j < c; j++) (*probs)[static_cast<size_t>(i) * c + j] /= sum;
    loss -= std::log((*probs)[static_cast<size_t>(i) * c + labels[i]]);
  }
  (*out.data)[0] = loss / n;
  attach(out, "cross_entropy_logits", {logits}, [logits, out, probs, labels, n, c]() {
    const double dy = (*out.grad)[0];
    for (int i = 0; i < n; i++)
      for (int j = 0; j < c; j++) {
        const double p = (*probs)[static_cast<size_t>(i) * c + j];
        const double onehot = (j == labels[i]) ? 1.0 : 0.0;
        (*logits.grad)[static_cast<size_t>(i) * c + j] += dy * (p - onehot) / n;
      }
  });
  return out;
}

Tensor cosine_distill_loss(const Tensor& student, const Tensor& teacher) {
  need_rank2(student, "cosine_distill_loss");
  if (student.shape != teacher.shape)
    throw std::runtime_error("cosine_distill_loss: shape mismatch " +
                             shape_str(student.shape) + " vs " + shape_str(teacher.shape));
  const int n = student.dim(0), d = student.dim(1);
  if (n == 0) throw std::runtime_error("cosine_distill_loss: empty input");
  constexpr double clamp = 1e-12;
  Tensor out = op_out({1}, want_grad({&student, &teacher}));
  auto ns = std::make_shared<std::vector<double>>(n);
  auto nt = std::make_shared<std::vector<double>>(n);
  auto cosv = std::make_shared<std::vector<double>>(n);
  double loss = 0.0;
  for (int i = 0; i < n; i++) {
    double ss = 0.0, tt = 0.0, st = 0.0;
    for (int j = 0; j < d; j++) {
      const double sv = student.at(i, j), tv = teacher.at(i, j);
      ss += sv * sv;
      tt += tv * tv;
      st += sv * tv;
    }
    const double tn = std::sqrt(tt);
    if (tn == 0.0)
      throw std::runtime_error("cosine_distill_loss: zero-norm teacher row " +
                               std::to_string(i));
    const double sn = std::max(std::sqrt(ss), clamp);
    (*ns)[i] = sn;
    (*nt)[i] = tn;
    const double cv = st / (sn * tn);
    (*cosv)[i] = cv;
    loss += 1.0 - cv;
  }
  (*out.data)[0] = loss / n;
  attach(out, "cosine_distill_loss", {student, teacher},
         [student, teacher, out, ns, nt, cosv, n, d]() {
           const double dy = (*out.grad)[0];
           for (int i = 0; i < n; i++) {
             const double sn = (*ns)[i], tn = (*nt)[i], cv = (*cosv)[i];
             const bool clamped = sn <= 1e-12;
             for (int j = 0; j < d; j++) {
               const double sv = student.at(i, j), tv = teacher.at(i, j);
               if (student.requires_grad) {
                 double dcos = tv / (sn * tn);
                 if (!clamped) dcos -= cv * sv / (sn * sn);
                 (*student.grad)[static_cast<size_t>(i) * d + j] += dy * (-dcos) / n;
               }
               if (teacher.requires_grad) {
                 const double dcos = sv / (sn * tn) - cv * tv / (tn * tn);
                 (*teacher.grad)[static_cast<size_t>(i) * d + j] += dy * (-dcos) / n;
               }
             }
           }
         });
  return out;
}

}  // namespace hop
