#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sabre/nn/classifier.hpp"
#include "sabre/nn/tensor.hpp"

namespace sabre::nn {

struct ResNetMiniConfig {
  int input_channels = 1;
  int input_side = 128;
  int stem_channels = 16;
  int stem_stride = 1;
  bool stem_pool = false;  // 2x2 average pool after the stem
  struct Stage {
    int blocks = 2;
    int channels = 16;
    int stride = 1;
  };
  std::vector<Stage> stages = {{2, 16, 1}, {2, 32, 2}, {2, 64, 2}};
  int classes = 2;
  std::uint64_t seed = 0;
};

void validate(const ResNetMiniConfig& cfg);

struct Param {
  std::string name;
  TShape shape;
  std::vector<double> value;
  bool trainable = true;
};

// Batch-norm running statistics (one pair per BN layer, inference state).
struct BnBuffers {
  std::vector<double> mean;
  std::vector<double> var;
};

// Tape node ids of one residual block's parameters. pw < 0 means identity
// shortcut; otherwise a 1x1 strided projection conv + BN.
struct BlockParamIds {
  int w1, b1, g1, be1;
  int w2, b2, g2, be2;
  int pw = -1, pb = -1, pg = -1, pbe = -1;
};

// conv-BN-ReLU-conv-BN plus shortcut, then ReLU. Exposed so the block
// structure itself is testable in isolation. Buffer pointers may be null in
// eval mode (then the const references are read).
int residual_block(Tape& t, int x, const BlockParamIds& p, int stride, BnBuffers* bn1_mut,
                   BnBuffers* bn2_mut, BnBuffers* bnp_mut, const BnBuffers& bn1,
                   const BnBuffers& bn2, const BnBuffers& bnp, bool training, double momentum,
                   double eps);

class ResNetMini : public DifferentiableClassifier {
 public:
  explicit ResNetMini(const ResNetMiniConfig& cfg);

  int classes() const override { return cfg_.classes; }
  int input_dim() const override { return cfg_.input_channels * cfg_.input_side * cfg_.input_side; }

  Mat forward(const Mat& batch) const override;
  Mat grad_input(const Mat& batch, const std::vector<int>& labels,
                 const LossSpec& loss) const override;
  Mat jacobian_input(const std::vector<double>& x, JacobianKind kind) const override;

  // One SGD-with-momentum step on a minibatch (training-mode BN); returns the
  // batch loss. Not metered: the gradient meter tracks attack-phase access.
  double train_step(const Mat& batch, const std::vector<int>& labels, double lr, double momentum,
                    double weight_decay);
  double eval_loss(const Mat& batch, const std::vector<int>& labels) const;

  const ResNetMiniConfig& config() const { return cfg_; }
  std::vector<Param>& params() { return params_; }
  const std::vector<Param>& params() const { return params_; }
  std::vector<BnBuffers>& bn_buffers() { return bn_; }
  const std::vector<BnBuffers>& bn_buffers() const { return bn_; }

 private:
  struct Built {
    int input = -1;
    int logits = -1;
    std::vector<int> param_ids;
  };
  Built build_graph(Tape& t, const Mat& batch, bool training, bool input_grad) const;
  int scalar_loss(Tape& t, int logits, const std::vector<int>& labels,
                  const LossSpec& loss) const;

  ResNetMiniConfig cfg_;
  std::vector<Param> params_;
  mutable std::vector<BnBuffers> bn_;  // mutated only on training-mode builds
  std::vector<std::vector<double>> velocity_;
};

}  // namespace sabre::nn
