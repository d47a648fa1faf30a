#pragma once

#include "sabre/nn/classifier.hpp"

namespace sabre::nn {

// Softmax regression over raw pixels: logits = (x/255) W^T + b. Gradients are
// closed-form, which makes this the reference model for attack unit tests and
// the linear-exactness properties.
class LinearSoftmaxModel : public DifferentiableClassifier {
 public:
  LinearSoftmaxModel(int classes, int input_dim, std::uint64_t seed, double weight_scale = 1.0);
  LinearSoftmaxModel(Mat weights, std::vector<double> bias);

  int classes() const override { return weights_.rows; }
  int input_dim() const override { return weights_.cols; }

  Mat forward(const Mat& batch) const override;
  Mat grad_input(const Mat& batch, const std::vector<int>& labels,
                 const LossSpec& loss) const override;
  Mat jacobian_input(const std::vector<double>& x, JacobianKind kind) const override;

  const Mat& weights() const { return weights_; }
  const std::vector<double>& bias() const { return bias_; }
  // Gradient of logit j with respect to pixels (row of W scaled by 1/255).
  std::vector<double> pixel_weight_row(int j) const;

 private:
  Mat weights_;  // classes x input_dim
  std::vector<double> bias_;
};

}  // namespace sabre::nn
