#include "sabre/nn/resnet.hpp"

#include <cmath>

namespace sabre::nn {

namespace {
constexpr double kBnMomentum = 0.1;
constexpr double kBnEps = 1e-5;

void he_uniform(std::vector<double>& w, int fan_in, Rng& rng) {
  const double lim = std::sqrt(6.0 / fan_in);
  for (double& x : w) x = rng.uniform(-lim, lim);
}
}  // namespace

void validate(const ResNetMiniConfig& cfg) {
  if (cfg.classes < 2) throw ConfigError("ResNetMiniConfig: classes must be >= 2");
  if (cfg.input_channels < 1 || cfg.input_side < 8)
    throw ConfigError("ResNetMiniConfig: bad input geometry");
  if (cfg.stem_channels < 1) throw ConfigError("ResNetMiniConfig: stem_channels must be >= 1");
  if (cfg.stem_stride != 1 && cfg.stem_stride != 2)
    throw ConfigError("ResNetMiniConfig: stem_stride must be 1 or 2");
  for (const auto& st : cfg.stages) {
    if (st.blocks < 1 || st.channels < 1)
      throw ConfigError("ResNetMiniConfig: stage blocks/channels must be >= 1");
    if (st.stride != 1 && st.stride != 2)
      throw ConfigError("ResNetMiniConfig: stage stride must be 1 or 2");
  }
}

int residual_block(Tape& t, int x, const BlockParamIds& p, int stride, BnBuffers* bn1_mut,
                   BnBuffers* bn2_mut, BnBuffers* bnp_mut, const BnBuffers& bn1,
                   const BnBuffers& bn2, const BnBuffers& bnp, bool training, double momentum,
                   double eps) {
  int y = t.conv2d(x, p.w1, p.b1, stride, 1);
  y = training ? t.batchnorm_train(y, p.g1, p.be1, &bn1_mut->mean, &bn1_mut->var, momentum, eps)
               : t.batchnorm_eval(y, p.g1, p.be1, bn1.mean, bn1.var, eps);
  y = t.relu(y);
  y = t.conv2d(y, p.w2, p.b2, 1, 1);
  y = training ? t.batchnorm_train(y, p.g2, p.be2, &bn2_mut->mean, &bn2_mut->var, momentum, eps)
               : t.batchnorm_eval(y, p.g2, p.be2, bn2.mean, bn2.var, eps);

  int shortcut = x;
  if (p.pw >= 0) {
    shortcut = t.conv2d(x, p.pw, p.pb, stride, 0);
    shortcut = training ? t.batchnorm_train(shortcut, p.pg, p.pbe, &bnp_mut->mean, &bnp_mut->var,
                                            momentum, eps)
                        : t.batchnorm_eval(shortcut, p.pg, p.pbe, bnp.mean, bnp.var, eps);
  }
  return t.relu(t.add(y, shortcut));
}

ResNetMini::ResNetMini(const ResNetMiniConfig& cfg) : cfg_(cfg) {
  validate(cfg_);
  Rng rng(cfg_.seed);

  auto add_param = [&](const std::string& name, TShape shape, bool trainable,
                       double fill) -> Param& {
    Param p;
    p.name = name;
    p.shape = std::move(shape);
    p.value.assign(static_cast<std::size_t>(p.shape.numel()), fill);
    p.trainable = trainable;
    params_.push_back(std::move(p));
    return params_.back();
  };
  auto add_conv = [&](const std::string& prefix, int co, int ci, int k) {
    Param& w = add_param(prefix + ".w", TShape{co, ci, k, k}, true, 0.0);
    he_uniform(w.value, ci * k * k, rng);
    add_param(prefix + ".b", TShape{co}, true, 0.0);
  };
  auto add_bn = [&](const std::string& prefix, int c) {
    add_param(prefix + ".g", TShape{c}, true, 1.0);
    add_param(prefix + ".beta", TShape{c}, true, 0.0);
    BnBuffers buf;
    buf.mean.assign(static_cast<std::size_t>(c), 0.0);
    buf.var.assign(static_cast<std::size_t>(c), 1.0);
    bn_.push_back(std::move(buf));
  };

  add_conv("stem", cfg_.stem_channels, cfg_.input_channels, 3);
  add_bn("stem.bn", cfg_.stem_channels);

  int in_ch = cfg_.stem_channels;
  for (std::size_t si = 0; si < cfg_.stages.size(); ++si) {
    const auto& st = cfg_.stages[si];
    for (int bi = 0; bi < st.blocks; ++bi) {
      const std::string pre = "s" + std::to_string(si) + ".b" + std::to_string(bi);
      const int stride = bi == 0 ? st.stride : 1;
      add_conv(pre + ".c1", st.channels, in_ch, 3);
      add_bn(pre + ".bn1", st.channels);
      add_conv(pre + ".c2", st.channels, st.channels, 3);
      add_bn(pre + ".bn2", st.channels);
      if (stride != 1 || in_ch != st.channels) {
        add_conv(pre + ".proj", st.channels, in_ch, 1);
        add_bn(pre + ".bnp", st.channels);
      }
      in_ch = st.channels;
    }
  }

  Param& fcw = add_param("fc.w", TShape{cfg_.classes, in_ch}, true, 0.0);
  he_uniform(fcw.value, in_ch, rng);
  add_param("fc.b", TShape{cfg_.classes}, true, 0.0);

  velocity_.resize(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i)
    velocity_[i].assign(params_[i].value.size(), 0.0);
}

ResNetMini::Built ResNetMini::build_graph(Tape& t, const Mat& batch, bool training,
                                          bool input_grad) const {
  if (batch.cols != input_dim()) throw InterfaceError("ResNetMini: input size mismatch");
  const int n = batch.rows;

  Built built;
  built.input = t.leaf(TShape{n, cfg_.input_channels, cfg_.input_side, cfg_.input_side}, batch.v,
                       input_grad);
  built.param_ids.reserve(params_.size());
  for (const Param& p : params_)
    built.param_ids.push_back(t.leaf(p.shape, p.value, p.trainable));

  std::size_t pi = 0;   // next param id index
  std::size_t bni = 0;  // next BN buffer index
  auto next = [&]() { return built.param_ids[pi++]; };
  auto bn_apply = [&](int x, int g, int be) {
    BnBuffers& buf = bn_[bni];
    const int y = training
                      ? t.batchnorm_train(x, g, be, &buf.mean, &buf.var, kBnMomentum, kBnEps)
                      : t.batchnorm_eval(x, g, be, buf.mean, buf.var, kBnEps);
    ++bni;
    return y;
  };

  int x = t.scale(built.input, 1.0 / 255.0);
  {
    const int w = next(), b = next(), g = next(), be = next();
    x = t.conv2d(x, w, b, cfg_.stem_stride, 1);
    x = bn_apply(x, g, be);
    x = t.relu(x);
    if (cfg_.stem_pool) x = t.avg_pool2(x);
  }

  int in_ch = cfg_.stem_channels;
  for (const auto& st : cfg_.stages) {
    for (int bi = 0; bi < st.blocks; ++bi) {
      const int stride = bi == 0 ? st.stride : 1;
      BlockParamIds ids{};
      ids.w1 = next();
      ids.b1 = next();
      ids.g1 = next();
      ids.be1 = next();
      BnBuffers* bn1 = &bn_[bni];
      const BnBuffers& bn1c = bn_[bni];
      ++bni;
      ids.w2 = next();
      ids.b2 = next();
      ids.g2 = next();
      ids.be2 = next();
      BnBuffers* bn2 = &bn_[bni];
      const BnBuffers& bn2c = bn_[bni];
      ++bni;
      BnBuffers* bnp = nullptr;
      const BnBuffers* bnpc = &bn2c;  // placeholder, unused for identity shortcuts
      if (stride != 1 || in_ch != st.channels) {
        ids.pw = next();
        ids.pb = next();
        ids.pg = next();
        ids.pbe = next();
        bnp = &bn_[bni];
        bnpc = &bn_[bni];
        ++bni;
      }
      x = residual_block(t, x, ids, stride, bn1, bn2, bnp, bn1c, bn2c, *bnpc, training,
                         kBnMomentum, kBnEps);
      in_ch = st.channels;
    }
  }

  x = t.global_avg_pool(x);
  const int fcw = next(), fcb = next();
  built.logits = t.linear(x, fcw, fcb);
  return built;
}

int ResNetMini::scalar_loss(Tape& t, int logits, const std::vector<int>& labels,
                            const LossSpec& loss) const {
  switch (loss.kind) {
    case LossKind::CrossEntropy:
      return t.cross_entropy_mean(logits, labels);
    case LossKind::CwTargeted:
    case LossKind::CwUntargeted: {
      if (t.shape(logits).dim(0) != 1)
        throw InterfaceError("CW loss expects a single-sample batch");
      if (labels.size() != 1) throw InterfaceError("CW loss expects one reference label");
      return t.cw_objective(logits, labels[0], loss.kappa,
                            loss.kind == LossKind::CwTargeted);
    }
  }
  throw InterfaceError("unknown loss kind");
}

Mat ResNetMini::forward(const Mat& batch) const {
  Tape t;
  const Built b = build_graph(t, batch, /*training=*/false, /*input_grad=*/false);
  Mat out(batch.rows, cfg_.classes);
  out.v = t.val(b.logits);
  if (!mat_all_finite(out)) throw InterfaceError("forward produced non-finite logits");
  return out;
}

Mat ResNetMini::grad_input(const Mat& batch, const std::vector<int>& labels,
                           const LossSpec& loss) const {
  charge_batch();
  Tape t;
  const Built b = build_graph(t, batch, /*training=*/false, /*input_grad=*/true);
  const int root = scalar_loss(t, b.logits, labels, loss);
  t.backward(root);
  Mat g(batch.rows, batch.cols);
  g.v = t.grad_of(b.input);
  return g;
}

Mat ResNetMini::jacobian_input(const std::vector<double>& x, JacobianKind kind) const {
  charge_jacobian();
  Mat batch(1, input_dim());
  if (static_cast<int>(x.size()) != input_dim())
    throw InterfaceError("jacobian_input: input size mismatch");
  batch.v = x;

  Tape t;
  const Built b = build_graph(t, batch, /*training=*/false, /*input_grad=*/true);
  const int head = kind == JacobianKind::Softmax ? t.softmax(b.logits) : b.logits;

  Mat jac(cfg_.classes, input_dim());
  for (int j = 0; j < cfg_.classes; ++j) {
    t.clear_grads();
    const int root = t.pick_sum(head, {{0, j}});
    t.backward(root);
    const std::vector<double>& gi = t.grad_of(b.input);
    std::copy(gi.begin(), gi.end(), jac.v.begin() + static_cast<std::size_t>(j) * input_dim());
  }
  return jac;
}

double ResNetMini::train_step(const Mat& batch, const std::vector<int>& labels, double lr,
                              double momentum, double weight_decay) {
  Tape t;
  const Built b = build_graph(t, batch, /*training=*/true, /*input_grad=*/false);
  const int root = t.cross_entropy_mean(b.logits, labels);
  const double loss = t.val(root)[0];
  t.backward(root);

  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (!params_[i].trainable) continue;
    const std::vector<double>& g = t.grad_of(b.param_ids[i]);
    std::vector<double>& w = params_[i].value;
    std::vector<double>& v = velocity_[i];
    for (std::size_t k = 0; k < w.size(); ++k) {
      v[k] = momentum * v[k] - lr * (g[k] + weight_decay * w[k]);
      w[k] += v[k];
    }
  }
  return loss;
}

double ResNetMini::eval_loss(const Mat& batch, const std::vector<int>& labels) const {
  Tape t;
  const Built b = build_graph(t, batch, /*training=*/false, /*input_grad=*/false);
  const int root = t.cross_entropy_mean(b.logits, labels);
  return t.val(root)[0];
}

}  // namespace sabre::nn
