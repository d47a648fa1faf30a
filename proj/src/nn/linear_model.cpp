#include "sabre/nn/linear_model.hpp"

#include <algorithm>
#include <cmath>

namespace sabre::nn {

namespace {
constexpr double kScale = 1.0 / 255.0;
}

LinearSoftmaxModel::LinearSoftmaxModel(int classes, int input_dim, std::uint64_t seed,
                                       double weight_scale) {
  if (classes < 2 || input_dim < 1)
    throw ConfigError("LinearSoftmaxModel: need >= 2 classes and >= 1 input dim");
  weights_ = Mat(classes, input_dim);
  bias_.assign(static_cast<std::size_t>(classes), 0.0);
  Rng rng(seed);
  for (double& w : weights_.v) w = weight_scale * rng.gaussian();
  for (double& b : bias_) b = 0.1 * weight_scale * rng.gaussian();
}

LinearSoftmaxModel::LinearSoftmaxModel(Mat weights, std::vector<double> bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rows < 2 || static_cast<int>(bias_.size()) != weights_.rows)
    throw InterfaceError("LinearSoftmaxModel: weight/bias shape mismatch");
}

Mat LinearSoftmaxModel::forward(const Mat& batch) const {
  if (batch.cols != input_dim()) throw InterfaceError("LinearSoftmaxModel: input size mismatch");
  Mat out(batch.rows, classes());
  for (int r = 0; r < batch.rows; ++r)
    for (int j = 0; j < classes(); ++j) {
      double acc = bias_[static_cast<std::size_t>(j)];
      for (int i = 0; i < batch.cols; ++i) acc += kScale * batch(r, i) * weights_(j, i);
      out(r, j) = acc;
    }
  return out;
}

Mat LinearSoftmaxModel::grad_input(const Mat& batch, const std::vector<int>& labels,
                                   const LossSpec& loss) const {
  charge_batch();
  if (static_cast<int>(labels.size()) != batch.rows)
    throw InterfaceError("grad_input: label count mismatch");
  const Mat logits = forward(batch);
  Mat g(batch.rows, batch.cols);

  if (loss.kind == LossKind::CrossEntropy) {
    for (int r = 0; r < batch.rows; ++r) {
      std::vector<double> row(logits.v.begin() + static_cast<std::size_t>(r) * logits.cols,
                              logits.v.begin() + static_cast<std::size_t>(r + 1) * logits.cols);
      std::vector<double> p = softmax_row(row);
      p[static_cast<std::size_t>(labels[static_cast<std::size_t>(r)])] -= 1.0;
      for (int i = 0; i < batch.cols; ++i) {
        double acc = 0.0;
        for (int j = 0; j < classes(); ++j) acc += p[static_cast<std::size_t>(j)] * weights_(j, i);
        g(r, i) = kScale * acc / batch.rows;
      }
    }
    return g;
  }

  // CW hinge losses, single-sample contract as in the CNN model.
  if (batch.rows != 1) throw InterfaceError("CW loss expects a single-sample batch");
  const int ref = labels[0];
  if (ref < 0 || ref >= classes()) throw InterfaceError("grad_input: label out of range");
  int other = -1;
  for (int j = 0; j < classes(); ++j) {
    if (j == ref) continue;
    if (other < 0 || logits(0, j) > logits(0, other)) other = j;
  }
  const bool targeted = loss.kind == LossKind::CwTargeted;
  const double margin =
      targeted ? logits(0, other) - logits(0, ref) : logits(0, ref) - logits(0, other);
  if (margin <= -loss.kappa) return g;  // flat region of the hinge
  const int pos = targeted ? other : ref;
  const int neg = targeted ? ref : other;
  for (int i = 0; i < batch.cols; ++i)
    g(0, i) = kScale * (weights_(pos, i) - weights_(neg, i));
  return g;
}

Mat LinearSoftmaxModel::jacobian_input(const std::vector<double>& x, JacobianKind kind) const {
  charge_jacobian();
  if (static_cast<int>(x.size()) != input_dim())
    throw InterfaceError("jacobian_input: input size mismatch");
  Mat jac(classes(), input_dim());
  if (kind == JacobianKind::Logits) {
    for (int j = 0; j < classes(); ++j)
      for (int i = 0; i < input_dim(); ++i) jac(j, i) = kScale * weights_(j, i);
    return jac;
  }
  Mat batch(1, input_dim());
  batch.v = x;
  const Mat logits = forward(batch);
  std::vector<double> row(logits.v.begin(), logits.v.end());
  const std::vector<double> p = softmax_row(row);
  // d softmax_j / dx = p_j (W_j - sum_k p_k W_k) / 255
  std::vector<double> wavg(static_cast<std::size_t>(input_dim()), 0.0);
  for (int k = 0; k < classes(); ++k)
    for (int i = 0; i < input_dim(); ++i)
      wavg[static_cast<std::size_t>(i)] += p[static_cast<std::size_t>(k)] * weights_(k, i);
  for (int j = 0; j < classes(); ++j)
    for (int i = 0; i < input_dim(); ++i)
      jac(j, i) = kScale * p[static_cast<std::size_t>(j)] *
                  (weights_(j, i) - wavg[static_cast<std::size_t>(i)]);
  return jac;
}

std::vector<double> LinearSoftmaxModel::pixel_weight_row(int j) const {
  std::vector<double> out(static_cast<std::size_t>(input_dim()));
  for (int i = 0; i < input_dim(); ++i) out[static_cast<std::size_t>(i)] = kScale * weights_(j, i);
  return out;
}

}  // namespace sabre::nn
