#include "sabre/nn/classifier.hpp"

#include <algorithm>
#include <cmath>

namespace sabre::nn {

std::vector<double> softmax_row(const std::vector<double>& logits) {
  std::vector<double> p(logits.size());
  double zmax = logits[0];
  for (double z : logits) zmax = std::max(zmax, z);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - zmax);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

std::pair<int, double> predict(const DifferentiableClassifier& model,
                               const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != model.input_dim())
    throw InterfaceError("predict: input size mismatch");
  Mat batch(1, model.input_dim());
  batch.v = x;
  const Mat logits = model.forward(batch);
  std::vector<double> row(logits.v.begin(), logits.v.end());
  const std::vector<double> p = softmax_row(row);
  int best = 0;
  for (int j = 1; j < static_cast<int>(p.size()); ++j)
    if (p[static_cast<std::size_t>(j)] > p[static_cast<std::size_t>(best)]) best = j;
  return {best, p[static_cast<std::size_t>(best)]};
}

std::vector<int> predict_batch(const DifferentiableClassifier& model, const Mat& batch) {
  std::vector<int> out(static_cast<std::size_t>(batch.rows));
  constexpr int kChunk = 32;
  for (int start = 0; start < batch.rows; start += kChunk) {
    const int n = std::min(kChunk, batch.rows - start);
    Mat sub(n, batch.cols);
    std::copy(batch.v.begin() + static_cast<std::size_t>(start) * batch.cols,
              batch.v.begin() + static_cast<std::size_t>(start + n) * batch.cols, sub.v.begin());
    const Mat logits = model.forward(sub);
    for (int r = 0; r < n; ++r) {
      int best = 0;
      for (int j = 1; j < logits.cols; ++j)
        if (logits(r, j) > logits(r, best)) best = j;
      out[static_cast<std::size_t>(start + r)] = best;
    }
  }
  return out;
}

}  // namespace sabre::nn
