#pragma once

#include <atomic>
#include <cstdint>
#include <utility>
#include <vector>

#include "sabre/common.hpp"

namespace sabre::nn {

// Loss flavors an attack can differentiate. For CwTargeted the per-sample
// label is the target class; for CwUntargeted it is the original class.
enum class LossKind { CrossEntropy, CwTargeted, CwUntargeted };

struct LossSpec {
  LossKind kind = LossKind::CrossEntropy;
  double kappa = 0.0;  // Carlini-Wagner hinge slack
};

enum class JacobianKind { Softmax, Logits };

// White-box classifier contract used by every attack. Inputs live in the
// [0, 255] pixel domain; the /255 normalization happens inside the model, so
// returned gradients are already with respect to pixels. The gradient meter
// counts batch gradient computations: grad_input charges one unit per call,
// jacobian_input charges ceil(classes / meter_batch_size) units.
class DifferentiableClassifier {
 public:
  virtual ~DifferentiableClassifier() = default;

  virtual int classes() const = 0;
  virtual int input_dim() const = 0;

  // rows = samples, cols = input_dim(); returns (rows x classes) logits
  virtual Mat forward(const Mat& batch) const = 0;
  // d(loss)/d(pixels), same shape as batch
  virtual Mat grad_input(const Mat& batch, const std::vector<int>& labels,
                         const LossSpec& loss) const = 0;
  // one sample -> (classes x input_dim); row j differentiates softmax output j
  // or logit j depending on kind
  virtual Mat jacobian_input(const std::vector<double>& x, JacobianKind kind) const = 0;

  std::int64_t gradient_meter() const { return meter_.load(); }
  void set_meter_batch_size(int n) {
    if (n < 1) throw ConfigError("set_meter_batch_size: batch size must be >= 1");
    meter_batch_ = n;
  }
  int meter_batch_size() const { return meter_batch_; }
  std::int64_t jacobian_charge() const { return (classes() + meter_batch_ - 1) / meter_batch_; }

 protected:
  void charge_batch() const { meter_.fetch_add(1); }
  void charge_jacobian() const { meter_.fetch_add(jacobian_charge()); }

 private:
  mutable std::atomic<std::int64_t> meter_{0};
  int meter_batch_ = 1;
};

std::vector<double> softmax_row(const std::vector<double>& logits);

// argmax of softmax(forward(x)); ties broken by the lowest class index.
std::pair<int, double> predict(const DifferentiableClassifier& model,
                               const std::vector<double>& x);
std::vector<int> predict_batch(const DifferentiableClassifier& model, const Mat& batch);

}  // namespace sabre::nn
