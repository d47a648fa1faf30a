#include "sabre/nn/train.hpp"

#include <algorithm>
#include <cmath>

namespace sabre::nn {

namespace {

// Deterministic Fisher-Yates.
void shuffle_idx(std::vector<int>& idx, Rng& rng) {
  for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i)
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(rng.uniform_int(i + 1))]);
}

Mat gather_rows(const Mat& m, const std::vector<int>& idx) {
  Mat out(static_cast<int>(idx.size()), m.cols);
  for (std::size_t r = 0; r < idx.size(); ++r)
    std::copy(m.v.begin() + static_cast<std::size_t>(idx[r]) * m.cols,
              m.v.begin() + static_cast<std::size_t>(idx[r] + 1) * m.cols,
              out.v.begin() + r * m.cols);
  return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<int>& idx) {
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[i] = labels[static_cast<std::size_t>(idx[i])];
  return out;
}

int num_classes(const std::vector<int>& labels) {
  int c = 0;
  for (int y : labels) c = std::max(c, y + 1);
  return c;
}

}  // namespace

std::pair<std::vector<int>, std::vector<int>> stratified_split(const std::vector<int>& labels,
                                                               double train_fraction,
                                                               std::uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ConfigError("stratified_split: fraction must be in (0, 1)");
  const int classes = num_classes(labels);
  std::vector<int> a, b;
  for (int c = 0; c < classes; ++c) {
    std::vector<int> pool;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) pool.push_back(static_cast<int>(i));
    Rng rng(fnv1a64(&c, sizeof(c), seed ^ 0x5374726174ULL));
    shuffle_idx(pool, rng);
    const int take = static_cast<int>(std::lround(train_fraction * pool.size()));
    for (std::size_t i = 0; i < pool.size(); ++i)
      (static_cast<int>(i) < take ? a : b).push_back(pool[i]);
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return {a, b};
}

std::vector<int> stratified_fold_assignment(const std::vector<int>& labels,
                                            const std::vector<int>& subset, int folds,
                                            std::uint64_t seed) {
  if (folds < 2) throw ConfigError("stratified_fold_assignment: folds must be >= 2");
  std::vector<int> fold_of(labels.size(), -1);
  const int classes = num_classes(labels);
  for (int c = 0; c < classes; ++c) {
    std::vector<int> pool;
    for (int i : subset)
      if (labels[static_cast<std::size_t>(i)] == c) pool.push_back(i);
    Rng rng(fnv1a64(&c, sizeof(c), seed ^ 0x466f6c64ULL));
    shuffle_idx(pool, rng);
    for (std::size_t i = 0; i < pool.size(); ++i)
      fold_of[static_cast<std::size_t>(pool[i])] = static_cast<int>(i) % folds;
  }
  return fold_of;
}

double fit_epochs(ResNetMini& model, const Dataset& data, const std::vector<int>& idx,
                  const TrainHyper& hyper, int epochs) {
  if (idx.empty()) throw ConfigError("fit_epochs: empty training subset");
  double last_epoch_loss = 0.0;
  for (int e = 0; e < epochs; ++e) {
    std::vector<int> order = idx;
    Rng rng(fnv1a64(&e, sizeof(e), hyper.seed ^ 0x45706f6368ULL));
    shuffle_idx(order, rng);

    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      const std::vector<int> chunk(order.begin() + static_cast<std::ptrdiff_t>(start),
                                   order.begin() + static_cast<std::ptrdiff_t>(end));
      const Mat x = gather_rows(data.inputs, chunk);
      const std::vector<int> y = gather_labels(data.labels, chunk);
      loss_sum += model.train_step(x, y, hyper.lr, hyper.momentum, hyper.weight_decay);
      ++batches;
    }
    last_epoch_loss = loss_sum / batches;
  }
  return last_epoch_loss;
}

double accuracy_pct(const DifferentiableClassifier& model, const Dataset& data,
                    const std::vector<int>& idx) {
  if (idx.empty()) throw ConfigError("accuracy_pct: empty subset");
  const Mat x = gather_rows(data.inputs, idx);
  const std::vector<int> pred = predict_batch(model, x);
  int hits = 0;
  for (std::size_t i = 0; i < idx.size(); ++i)
    if (pred[i] == data.labels[static_cast<std::size_t>(idx[i])]) ++hits;
  return 100.0 * hits / static_cast<double>(idx.size());
}

std::pair<std::unique_ptr<ResNetMini>, TrainReport> train(const ResNetMiniConfig& cfg,
                                                          const Dataset& data, int folds,
                                                          const TrainHyper& hyper) {
  validate(cfg);
  if (data.inputs.rows != static_cast<int>(data.labels.size()))
    throw InterfaceError("train: inputs/labels size mismatch");
  const int classes = num_classes(data.labels);
  if (classes != cfg.classes) throw ConfigError("train: label range does not match config classes");
  for (int c = 0; c < classes; ++c) {
    const long count = std::count(data.labels.begin(), data.labels.end(), c);
    if (count < folds)
      throw ConfigError("train: class " + std::to_string(c) + " has fewer samples than folds");
  }

  auto [train70, test30] = stratified_split(data.labels, 0.7, hyper.seed);
  const std::vector<int> fold_of =
      stratified_fold_assignment(data.labels, train70, folds, hyper.seed);

  TrainReport report;
  std::vector<int> best_epochs;
  for (int f = 0; f < folds; ++f) {
    std::vector<int> tr, va;
    for (int i : train70) (fold_of[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
    if (va.empty() || tr.empty())
      throw ConfigError("train: fold " + std::to_string(f) + " is empty");

    ResNetMiniConfig fold_cfg = cfg;
    fold_cfg.seed = fnv1a64(&f, sizeof(f), cfg.seed ^ 0x466f6c644d6fULL);
    ResNetMini model(fold_cfg);
    TrainHyper fold_hyper = hyper;
    fold_hyper.seed = fnv1a64(&f, sizeof(f), hyper.seed ^ 0x486970657221ULL);

    const Mat vx = gather_rows(data.inputs, va);
    const std::vector<int> vy = gather_labels(data.labels, va);

    double best_loss = HUGE_VAL;
    int best_epoch = 1, bad = 0, ran = 0;
    for (int e = 1; e <= hyper.max_epochs; ++e) {
      TrainHyper step = fold_hyper;
      step.seed = fnv1a64(&e, sizeof(e), fold_hyper.seed);
      fit_epochs(model, data, tr, step, 1);
      ++ran;
      const double vloss = model.eval_loss(vx, vy);
      if (vloss < best_loss) {
        best_loss = vloss;
        best_epoch = e;
        bad = 0;
      } else {
        ++bad;
        if (bad > hyper.patience) break;
      }
    }
    report.epochs_run += ran;
    best_epochs.push_back(best_epoch);
    report.fold_val_accuracy_pct.push_back(accuracy_pct(model, data, va));
  }

  double mean_best = 0.0;
  for (int e : best_epochs) mean_best += e;
  const int final_epochs = std::max(1, static_cast<int>(std::lround(mean_best / folds)));
  report.early_stop_epoch = final_epochs;

  auto model = std::make_unique<ResNetMini>(cfg);
  fit_epochs(*model, data, train70, hyper, final_epochs);
  report.epochs_run += final_epochs;
  report.test_accuracy_pct = accuracy_pct(*model, data, test30);
  return {std::move(model), report};
}

}  // namespace sabre::nn
