#pragma once

#include <memory>

#include "sabre/nn/resnet.hpp"

namespace sabre::nn {

struct TrainHyper {
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  int batch_size = 16;
  int max_epochs = 60;
  int patience = 8;
  std::uint64_t seed = 0;
};

struct TrainReport {
  std::vector<double> fold_val_accuracy_pct;
  double test_accuracy_pct = 0.0;
  int epochs_run = 0;        // total epochs across CV folds plus the retrain
  int early_stop_epoch = 0;  // epoch count chosen for the final retrain
};

// Flattened pixel inputs (rows = samples, cols = model input dim) with labels.
struct Dataset {
  Mat inputs;
  std::vector<int> labels;
};

// Seeded per-class shuffle, then the first round(fraction * class size) of
// each class goes to the first index list.
std::pair<std::vector<int>, std::vector<int>> stratified_split(const std::vector<int>& labels,
                                                               double train_fraction,
                                                               std::uint64_t seed);

// fold id per sample (-1 where excluded), stratified over the given subset.
std::vector<int> stratified_fold_assignment(const std::vector<int>& labels,
                                            const std::vector<int>& subset, int folds,
                                            std::uint64_t seed);

// Runs SGD for a fixed number of epochs over the subset; returns the mean
// minibatch loss of the last epoch.
double fit_epochs(ResNetMini& model, const Dataset& data, const std::vector<int>& idx,
                  const TrainHyper& hyper, int epochs);

double accuracy_pct(const DifferentiableClassifier& model, const Dataset& data,
                    const std::vector<int>& idx);

// 70/30 stratified test holdout, k-fold cross-validation with early stopping
// on fold-validation loss inside the 70%, then a final retrain of the full
// 70% for the averaged best epoch count.
std::pair<std::unique_ptr<ResNetMini>, TrainReport> train(const ResNetMiniConfig& cfg,
                                                          const Dataset& data, int folds,
                                                          const TrainHyper& hyper);

}  // namespace sabre::nn
