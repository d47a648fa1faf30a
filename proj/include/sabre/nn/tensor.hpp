#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sabre/common.hpp"

namespace sabre::nn {

// Shape of a tape value. Convolutional tensors are NCHW; matrices are
// (rows, cols); scalars have an empty dim list.
struct TShape {
  std::vector<int> d;

  TShape() = default;
  TShape(std::initializer_list<int> dims) : d(dims) {}

  std::int64_t numel() const {
    std::int64_t n = 1;
    for (int x : d) n *= x;
    return n;
  }
  int dim(int i) const { return d[static_cast<std::size_t>(i)]; }
  int rank() const { return static_cast<int>(d.size()); }
  bool operator==(const TShape& o) const { return d == o.d; }
};

// Reverse-mode tape. Nodes are appended in topological order during the
// forward pass; backward() walks them in reverse, so closures only ever read
// gradients of later nodes and accumulate into earlier ones. One tape per
// forward/backward pair; not thread-safe (use one tape per worker).
class Tape {
 public:
  struct Node {
    TShape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool needs_grad = false;
    std::function<void(Tape&, int)> backprop;  // may be empty (leaf/constant)
  };

  int leaf(TShape shape, std::vector<double> value, bool needs_grad);

  // --- layers -------------------------------------------------------------
  int scale(int x, double s);
  int conv2d(int x, int w, int b, int stride, int pad);  // x NCHW, w (Co,Ci,K,K)
  int batchnorm_train(int x, int gamma, int beta, std::vector<double>* running_mean,
                      std::vector<double>* running_var, double momentum, double eps);
  int batchnorm_eval(int x, int gamma, int beta, const std::vector<double>& running_mean,
                     const std::vector<double>& running_var, double eps);
  int relu(int x);
  int add(int a, int b);
  int avg_pool2(int x);        // 2x2, stride 2
  int global_avg_pool(int x);  // NCHW -> (N, C)
  int linear(int x, int w, int b);  // (N,F) x (C,F)^T + b -> (N,C)

  // --- heads --------------------------------------------------------------
  int softmax(int logits);  // rowwise on (N, C)
  int cross_entropy_mean(int logits, const std::vector<int>& labels);  // scalar
  // Sum of selected entries; seeds per-logit/per-output gradients.
  int pick_sum(int x, const std::vector<std::pair<int, int>>& coords);
  // Carlini-Wagner hinge on a single-row logits node:
  //   targeted:     max(max_{j != ref} z_j - z_ref, -kappa)
  //   non-targeted: max(z_ref - max_{j != ref} z_j, -kappa)
  int cw_objective(int logits, int ref_class, double kappa, bool targeted);

  void backward(int root);
  // Drops every accumulated gradient so another backward() can run on the
  // same graph (used when pulling one jacobian row per class).
  void clear_grads();

  const TShape& shape(int id) const { return nodes_[static_cast<std::size_t>(id)].shape; }
  const std::vector<double>& val(int id) const {
    return nodes_[static_cast<std::size_t>(id)].value;
  }
  const std::vector<double>& grad_of(int id) const;

 private:
  int push(TShape shape, std::vector<double> value, bool needs_grad,
           std::function<void(Tape&, int)> backprop);
  std::vector<double>& grad_mut(int id);
  void ensure_grad(int id);

  std::vector<Node> nodes_;
};

}  // namespace sabre::nn
