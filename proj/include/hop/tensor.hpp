#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hop {

struct Node;

// Dense row-major f64 tensor. Copies are shallow: data/grad buffers are
// shared, so a copy held by an autograd node aliases the original storage.
struct Tensor {
  std::vector<int> shape;
  std::shared_ptr<std::vector<double>> data;
  std::shared_ptr<std::vector<double>> grad;  // allocated only when requires_grad
  bool requires_grad = false;
  std::shared_ptr<Node> node;  // set by ops, null for leaves

  Tensor() = default;

  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[static_cast<size_t>(i)]; }
  size_t numel() const;
  bool defined() const { return data != nullptr; }

  double* ptr() { return data->data(); }
  const double* ptr() const { return data->data(); }
  double* gptr() { return grad->data(); }
  const double* gptr() const { return grad->data(); }

  double& at(int i) { return (*data)[static_cast<size_t>(i)]; }
  double at(int i) const { return (*data)[static_cast<size_t>(i)]; }
  double& at(int i, int j) { return (*data)[static_cast<size_t>(i) * dim(1) + j]; }
  double at(int i, int j) const { return (*data)[static_cast<size_t>(i) * dim(1) + j]; }

  // Marks this tensor as a trainable leaf and allocates its grad buffer.
  Tensor& set_requires_grad();
};

struct Node {
  std::vector<Tensor> parents;
  std::function<void()> backprop;  // captures the op output; accumulates into parent grads
  const char* op = "";
};

size_t shape_numel(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

Tensor zeros(const std::vector<int>& shape);
Tensor full(const std::vector<int>& shape, double v);
Tensor from_vector(const std::vector<int>& shape, const std::vector<double>& v);

// Throws if any value is NaN/Inf; callers use it at module boundaries.
void check_finite(const Tensor& t, const char* where);

double scalar_value(const Tensor& t);

void zero_grad(Tensor& t);

// Reverse-mode sweep from a scalar loss. Seeds d(loss)/d(loss)=1 and walks the
// graph in reverse topological order, accumulating into leaf grads.
void backward(const Tensor& loss);

}  // namespace hop
