#include "hop/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace hop {

size_t shape_numel(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::runtime_error("tensor: negative dimension");
    n *= static_cast<size_t>(d);
  }
  return n;
}

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); i++) os << (i ? "," : "") << shape[i];
  os << "]";
  return os.str();
}

size_t Tensor::numel() const { return shape_numel(shape); }

Tensor& Tensor::set_requires_grad() {
  requires_grad = true;
  if (!grad) grad = std::make_shared<std::vector<double>>(numel(), 0.0);
  return *this;
}

Tensor zeros(const std::vector<int>& shape) {
  Tensor t;
  t.shape = shape;
  t.data = std::make_shared<std::vector<double>>(shape_numel(shape), 0.0);
  return t;
}

Tensor full(const std::vector<int>& shape, double v) {
  Tensor t = zeros(shape);
  for (auto& x : *t.data) x = v;
  return t;
}

Tensor from_vector(const std::vector<int>& shape, const std::vector<double>& v) {
  if (shape_numel(shape) != v.size())
    throw std::runtime_error("from_vector: size mismatch for shape " + shape_str(shape));
  Tensor t;
  t.shape = shape;
  t.data = std::make_shared<std::vector<double>>(v);
  check_finite(t, "from_vector");
  return t;
}

void check_finite(const Tensor& t, const char* where) {
  for (double x : *t.data)
    if (!std::isfinite(x))
      throw std::runtime_error(std::string(where) + ": non-finite value in tensor " +
                               shape_str(t.shape));
}

double scalar_value(const Tensor& t) {
  if (t.numel() != 1) throw std::runtime_error("scalar_value: tensor has " +
                                               std::to_string(t.numel()) + " elements");
  return (*t.data)[0];
}

void zero_grad(Tensor& t) {
  if (t.grad)
    for (auto& g : *t.grad) g = 0.0;
}

namespace {

void topo_visit(const std::shared_ptr<Node>& n, std::unordered_set<Node*>& seen,
                std::vector<std::shared_ptr<Node>>& order) {
  // Iterative DFS; graphs can be deep (per-token chains).
  struct Frame {
    std::shared_ptr<Node> node;
    size_t next_parent = 0;
  };
  std::vector<Frame> stack;
  if (!n || seen.count(n.get())) return;
  seen.insert(n.get());
  stack.push_back({n, 0});
  while (!stack.empty()) {
    Frame& f = stack.back();
    bool descended = false;
    while (f.next_parent < f.node->parents.size()) {
      const Tensor& p = f.node->parents[f.next_parent++];
      if (p.node && !seen.count(p.node.get())) {
        seen.insert(p.node.get());
        stack.push_back({p.node, 0});
        descended = true;
        break;
      }
    }
    if (!descended && f.next_parent >= f.node->parents.size()) {
      order.push_back(f.node);
      stack.pop_back();
    }
  }
}

}  // namespace

void backward(const Tensor& loss) {
  if (loss.numel() != 1) throw std::runtime_error("backward: loss must be scalar");
  if (!std::isfinite((*loss.data)[0])) throw std::runtime_error("backward: non-finite loss");
  if (!loss.requires_grad) throw std::runtime_error("backward: loss does not require grad");
  (*loss.grad)[0] = 1.0;
  if (!loss.node) return;

  std::unordered_set<Node*> seen;
  std::vector<std::shared_ptr<Node>> order;
  topo_visit(loss.node, seen, order);
  // Post-order puts parents before children; run it back to front.
  for (auto it = order.rbegin(); it != order.rend(); ++it) (*it)->backprop();
}

}  // namespace hop
