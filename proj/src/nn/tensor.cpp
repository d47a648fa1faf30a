#include "sabre/nn/tensor.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <memory>

namespace sabre::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

void im2col(const double* x, int n, int ci, int h, int w, int k, int stride, int pad, int ho,
            int wo, double* cols) {
  const std::int64_t ncol = static_cast<std::int64_t>(n) * ho * wo;
  for (int c = 0; c < ci; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const int r = (c * k + kh) * k + kw;
        double* dst = cols + r * ncol;
        for (int b = 0; b < n; ++b) {
          const double* xc = x + (static_cast<std::int64_t>(b) * ci + c) * h * w;
          for (int oh = 0; oh < ho; ++oh) {
            const int ih = oh * stride - pad + kh;
            double* row = dst + (static_cast<std::int64_t>(b) * ho + oh) * wo;
            if (ih < 0 || ih >= h) {
              std::fill(row, row + wo, 0.0);
              continue;
            }
            const double* xrow = xc + static_cast<std::int64_t>(ih) * w;
            for (int ow = 0; ow < wo; ++ow) {
              const int iw = ow * stride - pad + kw;
              row[ow] = (iw >= 0 && iw < w) ? xrow[iw] : 0.0;
            }
          }
        }
      }
    }
  }
}

void col2im_acc(const double* cols, int n, int ci, int h, int w, int k, int stride, int pad,
                int ho, int wo, double* dx) {
  const std::int64_t ncol = static_cast<std::int64_t>(n) * ho * wo;
  for (int c = 0; c < ci; ++c) {
    for (int kh = 0; kh < k; ++kh) {
      for (int kw = 0; kw < k; ++kw) {
        const int r = (c * k + kh) * k + kw;
        const double* src = cols + r * ncol;
        for (int b = 0; b < n; ++b) {
          double* xc = dx + (static_cast<std::int64_t>(b) * ci + c) * h * w;
          for (int oh = 0; oh < ho; ++oh) {
            const int ih = oh * stride - pad + kh;
            if (ih < 0 || ih >= h) continue;
            const double* row = src + (static_cast<std::int64_t>(b) * ho + oh) * wo;
            double* xrow = xc + static_cast<std::int64_t>(ih) * w;
            for (int ow = 0; ow < wo; ++ow) {
              const int iw = ow * stride - pad + kw;
              if (iw >= 0 && iw < w) xrow[iw] += row[ow];
            }
          }
        }
      }
    }
  }
}

}  // namespace

int Tape::push(TShape shape, std::vector<double> value, bool needs_grad,
               std::function<void(Tape&, int)> backprop) {
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(TShape shape, std::vector<double> value, bool needs_grad) {
  if (static_cast<std::int64_t>(value.size()) != shape.numel())
    throw InterfaceError("Tape::leaf: value size does not match shape");
  return push(std::move(shape), std::move(value), needs_grad, nullptr);
}

void Tape::ensure_grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
}

std::vector<double>& Tape::grad_mut(int id) {
  ensure_grad(id);
  return nodes_[static_cast<std::size_t>(id)].grad;
}

const std::vector<double>& Tape::grad_of(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty()) throw InterfaceError("Tape::grad_of: gradient not computed for this node");
  return n.grad;
}

void Tape::clear_grads() {
  for (Node& n : nodes_) n.grad.clear();
}

void Tape::backward(int root) {
  Node& r = nodes_[static_cast<std::size_t>(root)];
  if (r.shape.numel() != 1) throw InterfaceError("Tape::backward: root must be a scalar");
  ensure_grad(root);
  r.grad[0] = 1.0;
  for (int id = root; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.empty() || !n.backprop) continue;
    n.backprop(*this, id);
  }
}

int Tape::scale(int x, double s) {
  const Node& xn = nodes_[static_cast<std::size_t>(x)];
  std::vector<double> out(xn.value.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * xn.value[i];
  return push(xn.shape, std::move(out), xn.needs_grad, [x, s](Tape& t, int self) {
    if (!t.nodes_[static_cast<std::size_t>(x)].needs_grad) return;
    const std::vector<double>& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    std::vector<double>& gx = t.grad_mut(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += s * g[i];
  });
}

int Tape::conv2d(int x, int w, int b, int stride, int pad) {
  const Node& xn = nodes_[static_cast<std::size_t>(x)];
  const Node& wn = nodes_[static_cast<std::size_t>(w)];
  const Node& bn = nodes_[static_cast<std::size_t>(b)];
  if (xn.shape.rank() != 4 || wn.shape.rank() != 4)
    throw InterfaceError("conv2d: expects NCHW input and (Co,Ci,K,K) weights");
  const int n = xn.shape.dim(0), ci = xn.shape.dim(1), h = xn.shape.dim(2), wd = xn.shape.dim(3);
  const int co = wn.shape.dim(0), k = wn.shape.dim(2);
  if (wn.shape.dim(1) != ci || wn.shape.dim(3) != k)
    throw InterfaceError("conv2d: weight shape mismatch");
  if (bn.shape.numel() != co) throw InterfaceError("conv2d: bias shape mismatch");
  const int ho = (h + 2 * pad - k) / stride + 1;
  const int wo = (wd + 2 * pad - k) / stride + 1;
  if (ho < 1 || wo < 1) throw InterfaceError("conv2d: output would be empty");

  const int rrows = ci * k * k;
  const std::int64_t ncol = static_cast<std::int64_t>(n) * ho * wo;
  auto cols = std::make_shared<std::vector<double>>(static_cast<std::size_t>(rrows) * ncol);
  im2col(xn.value.data(), n, ci, h, wd, k, stride, pad, ho, wo, cols->data());

  std::vector<double> y(static_cast<std::size_t>(co) * ncol);
  {
    CMapMat wm(wn.value.data(), co, rrows);
    CMapMat cm(cols->data(), rrows, ncol);
    MapMat ym(y.data(), co, ncol);
    ym.noalias() = wm * cm;
  }
  // scatter (co, ncol) -> (n, co, ho, wo) and add bias
  std::vector<double> out(static_cast<std::size_t>(n) * co * ho * wo);
  for (int c = 0; c < co; ++c) {
    const double* src = y.data() + static_cast<std::int64_t>(c) * ncol;
    const double bias = bn.value[static_cast<std::size_t>(c)];
    for (int bb = 0; bb < n; ++bb) {
      double* dst = out.data() + ((static_cast<std::int64_t>(bb) * co + c) * ho) * wo;
      const double* s = src + static_cast<std::int64_t>(bb) * ho * wo;
      for (int i = 0; i < ho * wo; ++i) dst[i] = s[i] + bias;
    }
  }

  const bool any = xn.needs_grad || wn.needs_grad || bn.needs_grad;
  return push(TShape{n, co, ho, wo}, std::move(out), any,
              [x, w, b, stride, pad, n, ci, h, wd, co, k, ho, wo, rrows, ncol, cols](Tape& t,
                                                                                    int self) {
                const std::vector<double>& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                // gather (n, co, ho, wo) -> (co, ncol)
                std::vector<double> gy(static_cast<std::size_t>(co) * ncol);
                for (int c = 0; c < co; ++c) {
                  double* dst = gy.data() + static_cast<std::int64_t>(c) * ncol;
                  for (int bb = 0; bb < n; ++bb) {
                    const double* src =
                        g.data() + ((static_cast<std::int64_t>(bb) * co + c) * ho) * wo;
                    double* d = dst + static_cast<std::int64_t>(bb) * ho * wo;
                    for (int i = 0; i < ho * wo; ++i) d[i] = src[i];
                  }
                }
                CMapMat gym(gy.data(), co, ncol);
                if (t.nodes_[static_cast<std::size_t>(b)].needs_grad) {
                  std::vector<double>& gb = t.grad_mut(b);
                  for (int c = 0; c < co; ++c)
                    gb[static_cast<std::size_t>(c)] += gym.row(c).sum();
                }
                if (t.nodes_[static_cast<std::size_t>(w)].needs_grad) {
                  std::vector<double>& gw = t.grad_mut(w);
                  CMapMat cm(cols->data(), rrows, ncol);
                  MapMat gwm(gw.data(), co, rrows);
                  gwm.noalias() += gym * cm.transpose();
                }
                if (t.nodes_[static_cast<std::size_t>(x)].needs_grad) {
                  const Node& wn2 = t.nodes_[static_cast<std::size_t>(w)];
                  CMapMat wm(wn2.value.data(), co, rrows);
                  std::vector<double> gcols(static_cast<std::size_t>(rrows) * ncol);
                  MapMat gcm(gcols.data(), rrows, ncol);
                  gcm.noalias() = wm.transpose() * gym;
                  col2im_acc(gcols.data(), n, ci, h, wd, k, stride, pad, ho, wo,
                             t.grad_mut(x).data());
                }
              });
}

int Tape::batchnorm_train(int x, int gamma, int beta, std::vector<double>* running_mean,
                          std::vector<double>* running_var, double momentum, double eps) {
  const Node& xn = nodes_[static_cast<std::size_t>(x)];
  if (xn.shape.rank() != 4) throw InterfaceError("batchnorm: expects NCHW input");
  const int n = xn.shape.dim(0), c = xn.shape.dim(1), h = xn.shape.dim(2), w = xn.shape.dim(3);
  const std::int64_t m = static_cast<std::int64_t>(n) * h * w;
  const Node& gn = nodes_[static_cast<std::size_t>(gamma)];
  const Node& be = nodes_[static_cast<std::size_t>(beta)];
  if (gn.shape.numel() != c || be.shape.numel() != c)
    throw InterfaceError("batchnorm: gamma/beta shape mismatch");

  auto xhat = std::make_shared<std::vector<double>>(xn.value.size());
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(c));

  std::vector<double> out(xn.value.size());
  const std::int64_t hw = static_cast<std::int64_t>(h) * w;
  for (int ch = 0; ch < c; ++ch) {
    double mean = 0.0;
    for (int bb = 0; bb < n; ++bb) {
      const double* p = xn.value.data() + (static_cast<std::int64_t>(bb) * c + ch) * hw;
      for (std::int64_t i = 0; i < hw; ++i) mean += p[i];
    }
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (int bb = 0; bb < n; ++bb) {
      const double* p = xn.value.data() + (static_cast<std::int64_t>(bb) * c + ch) * hw;
      for (std::int64_t i = 0; i < hw; ++i) var += (p[i] - mean) * (p[i] - mean);
    }
    var /= static_cast<double>(m);
    const double istd = 1.0 / std::sqrt(var + eps);
    (*inv_std)[static_cast<std::size_t>(ch)] = istd;
    const double ga = gn.value[static_cast<std::size_t>(ch)];
    const double bt = be.value[static_cast<std::size_t>(ch)];
    for (int bb = 0; bb < n; ++bb) {
      const std::int64_t base = (static_cast<std::int64_t>(bb) * c + ch) * hw;
      for (std::int64_t i = 0; i < hw; ++i) {
        const double xh = (xn.value[static_cast<std::size_t>(base + i)] - mean) * istd;
        (*xhat)[static_cast<std::size_t>(base + i)] = xh;
        out[static_cast<std::size_t>(base + i)] = ga * xh + bt;
      }
    }
    if (running_mean) {
      (*running_mean)[static_cast<std::size_t>(ch)] =
          (1.0 - momentum) * (*running_mean)[static_cast<std::size_t>(ch)] + momentum * mean;
      (*running_var)[static_cast<std::size_t>(ch)] =
          (1.0 - momentum) * (*running_var)[static_cast<std::size_t>(ch)] + momentum * var;
    }
  }

  const bool any = xn.needs_grad || gn.needs_grad || be.needs_grad;
  return push(xn.shape, std::move(out), any,
              [x, gamma, beta, n, c, h, w, m, xhat, inv_std](Tape& t, int self) {
                const std::vector<double>& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                const std::int64_t hw = static_cast<std::int64_t>(h) * w;
                const Node& gn2 = t.nodes_[static_cast<std::size_t>(gamma)];
                for (int ch = 0; ch < c; ++ch) {
                  double sum_g = 0.0, sum_gx = 0.0;
                  for (int bb = 0; bb < n; ++bb) {
                    const std::int64_t base = (static_cast<std::int64_t>(bb) * c + ch) * hw;
                    for (std::int64_t i = 0; i < hw; ++i) {
                      sum_g += g[static_cast<std::size_t>(base + i)];
                      sum_gx += g[static_cast<std::size_t>(base + i)] *
                                (*xhat)[static_cast<std::size_t>(base + i)];
                    }
                  }
                  if (t.nodes_[static_cast<std::size_t>(gamma)].needs_grad)
                    t.grad_mut(gamma)[static_cast<std::size_t>(ch)] += sum_gx;
                  if (t.nodes_[static_cast<std::size_t>(beta)].needs_grad)
                    t.grad_mut(beta)[static_cast<std::size_t>(ch)] += sum_g;
                  if (t.nodes_[static_cast<std::size_t>(x)].needs_grad) {
                    const double ga = gn2.value[static_cast<std::size_t>(ch)];
                    const double istd = (*inv_std)[static_cast<std::size_t>(ch)];
                    const double mg = sum_g / static_cast<double>(m);
                    const double mgx = sum_gx / static_cast<double>(m);
                    std::vector<double>& gx = t.grad_mut(x);
                    for (int bb = 0; bb < n; ++bb) {
                      const std::int64_t base = (static_cast<std::int64_t>(bb) * c + ch) * hw;
                      for (std::int64_t i = 0; i < hw; ++i) {
                        const double xh = (*xhat)[static_cast<std::size_t>(base + i)];
                        gx[static_cast<std::size_t>(base + i)] +=
                            ga * istd * (g[static_cast<std::size_t>(base + i)] - mg - xh * mgx);
                      }
                    }
                  }
                }
              });
}

int Tape::batchnorm_eval(int x, int gamma, int beta, const std::vector<double>& running_mean,
                         const std::vector<double>& running_var, double eps) {
  const Node& xn = nodes_[static_cast<std::size_t>(x)];
  if (xn.shape.rank() != 4) throw InterfaceError("batchnorm: expects NCHW input");
  const int n = xn.shape.dim(0), c = xn.shape.dim(1), h = xn.shape.dim(2), w = xn.shape.dim(3);
  const Node& gn = nodes_[static_cast<std::size_t>(gamma)];
  const Node& be = nodes_[static_cast<std::size_t>(beta)];
  if (gn.shape.numel() != c || be.shape.numel() != c)
    throw InterfaceError("batchnorm: gamma/beta shape mismatch");

  auto inv_std = std::make_shared<std::vector<double>>(static_cast<std::size_t>(c));
  auto mean = std::make_shared<std::vector<double>>(running_mean);
  for (int ch = 0; ch < c; ++ch)
    (*inv_std)[static_cast<std::size_t>(ch)] =
        1.0 / std::sqrt(running_var[static_cast<std::size_t>(ch)] + eps);

  const std::int64_t hw = static_cast<std::int64_t>(h) * w;
  std::vector<double> out(xn.value.size());
  for (int bb = 0; bb < n; ++bb) {
    for (int ch = 0; ch < c; ++ch) {
      const std::int64_t base = (static_cast<std::int64_t>(bb) * c + ch) * hw;
      const double ga = gn.value[static_cast<std::size_t>(ch)];
      const double bt = be.value[static_cast<std::size_t>(ch)];
      const double mu = (*mean)[static_cast<std::size_t>(ch)];
      const double istd = (*inv_std)[static_cast<std::size_t>(ch)];
      for (std::int64_t i = 0; i < hw; ++i)
        out[static_cast<std::size_t>(base + i)] =
            ga * (xn.value[static_cast<std::size_t>(base + i)] - mu) * istd + bt;
    }
  }

  const bool any = xn.needs_grad || gn.needs_grad || be.needs_grad;
  return push(xn.shape, std::move(out), any,
              [x, gamma, beta, n, c, h, w, inv_std, mean](Tape& t, int self) {
                const std::vector<double>& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                const Node& xn2 = t.nodes_[static_cast<std::size_t>(x)];
                const Node& gn2 = t.nodes_[static_cast<std::size_t>(gamma)];
                const std::int64_t hw = static_cast<std::int64_t>(h) * w;
                for (int ch = 0; ch < c; ++ch) {
                  const double ga = gn2.value[static_cast<std::size_t>(ch)];
                  const double istd = (*inv_std)[static_cast<std::size_t>(ch)];
                  const double mu = (*mean)[static_cast<std::size_t>(ch)];
                  double sum_g = 0.0, sum_gx = 0.0;
                  for (int bb = 0; bb < n; ++bb) {
                    const std::int64_t base = (static_cast<std::int64_t>(bb) * c + ch) * hw;
                    for (std::int64_t i = 0; i < hw; ++i) {
                      const double gi = g[static_cast<std::size_t>(base + i)];
                      sum_g += gi;
                      sum_gx += gi * (xn2.value[static_cast<std::size_t>(base + i)] - mu) * istd;
                    }
                  }
                  if (t.nodes_[static_cast<std::size_t>(gamma)].needs_grad)
                    t.grad_mut(gamma)[static_cast<std::size_t>(ch)] += sum_gx;
                  if (t.nodes_[static_cast<std::size_t>(beta)].needs_grad)
                    t.grad_mut(beta)[static_cast<std::size_t>(ch)] += sum_g;
                  if (t.nodes_[static_cast<std::size_t>(x)].needs_grad) {
                    std::vector<double>& gx = t.grad_mut(x);
                    for (int bb = 0; bb < n; ++bb) {
                      const std::int64_t base = (static_cast<std::int64_t>(bb) * c + ch) * hw;
                      for (std::int64_t i = 0; i < hw; ++i)
                        gx[static_cast<std::size_t>(base + i)] +=
                            g[static_cast<std::size_t>(base + i)] * ga * istd;
                    }
                  }
                }
              });
}

int Tape::relu(int x) {
  const Node& xn = nodes_[static_cast<std::size_t>(x)];
  std::vector<double> out(xn.value.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xn.value[i] > 0.0 ? xn.value[i] : 0.0;
  return push(xn.shape, std::move(out), xn.needs_grad, [x](Tape& t, int self) {
    if (!t.nodes_[static_cast<std::size_t>(x)].needs_grad) return;
    const Node& xn2 = t.nodes_[static_cast<std::size_t>(x)];
    const std::vector<double>& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    std::vector<double>& gx = t.grad_mut(x);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xn2.value[i] > 0.0) gx[i] += g[i];
  });
}

int Tape::add(int a, int b) {
  const Node& an = nodes_[static_cast<std::size_t>(a)];
  const Node& bn = nodes_[static_cast<std::size_t>(b)];
  if (!(an.shape == bn.shape)) throw InterfaceError("add: shape mismatch");
  std::vector<double> out(an.value.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = an.value[i] + bn.value[i];
  return push(an.shape, std::move(out), an.needs_grad || bn.needs_grad,
              [a, b](Tape& t, int self) {
                const std::vector<double>& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                if (t.nodes_[static_cast<std::size_t>(a)].needs_grad) {
                  std::vector<double>& ga = t.grad_mut(a);
                  for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                }
                if (t.nodes_[static_cast<std::size_t>(b)].needs_grad) {
                  std::vector<double>& gb = t.grad_mut(b);
                  for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
                }
              });
}

int Tape::avg_pool2(int x) {
  const Node& xn = nodes_[static_cast<std::size_t>(x)];
  if (xn.shape.rank() != 4) throw InterfaceError("avg_pool2: expects NCHW input");
  const int n = xn.shape.dim(0), c = xn.shape.dim(1), h = xn.shape.dim(2), w = xn.shape.dim(3);
  if (h % 2 != 0 || w % 2 != 0) throw InterfaceError("avg_pool2: H and W must be even");
  const int ho = h / 2, wo = w / 2;
  std::vector<double> out(static_cast<std::size_t>(n) * c * ho * wo);
  for (int bb = 0; bb < n; ++bb)
    for (int ch = 0; ch < c; ++ch) {
      const double* src =
          xn.value.data() + (static_cast<std::int64_t>(bb) * c + ch) * h * w;
      double* dst = out.data() + (static_cast<std::int64_t>(bb) * c + ch) * ho * wo;
      for (int oh = 0; oh < ho; ++oh)
        for (int ow = 0; ow < wo; ++ow)
          dst[static_cast<std::int64_t>(oh) * wo + ow] =
              0.25 * (src[(2 * oh) * w + 2 * ow] + src[(2 * oh) * w + 2 * ow + 1] +
                      src[(2 * oh + 1) * w + 2 * ow] + src[(2 * oh + 1) * w + 2 * ow + 1]);
    }
  return push(TShape{n, c, ho, wo}, std::move(out), xn.needs_grad,
              [x, n, c, h, w, ho, wo](Tape& t, int self) {
                if (!t.nodes_[static_cast<std::size_t>(x)].needs_grad) return;
                const std::vector<double>& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                std::vector<double>& gx = t.grad_mut(x);
                for (int bb = 0; bb < n; ++bb)
                  for (int ch = 0; ch < c; ++ch) {
                    const double* src =
                        g.data() + (static_cast<std::int64_t>(bb) * c + ch) * ho * wo;
                    double* dst = gx.data() + (static_cast<std::int64_t>(bb) * c + ch) * h * w;
                    for (int oh = 0; oh < ho; ++oh)
                      for (int ow = 0; ow < wo; ++ow) {
                        const double gv = 0.25 * src[static_cast<std::int64_t>(oh) * wo + ow];
                        dst[(2 * oh) * w + 2 * ow] += gv;
                        dst[(2 * oh) * w + 2 * ow + 1] += gv;
                        dst[(2 * oh + 1) * w + 2 * ow] += gv;
                        dst[(2 * oh + 1) * w + 2 * ow + 1] += gv;
                      }
                  }
              });
}

int Tape::global_avg_pool(int x) {
  const Node& xn = nodes_[static_cast<std::size_t>(x)];
  if (xn.shape.rank() != 4) throw InterfaceError("global_avg_pool: expects NCHW input");
  const int n = xn.shape.dim(0), c = xn.shape.dim(1), h = xn.shape.dim(2), w = xn.shape.dim(3);
  const std::int64_t hw = static_cast<std::int64_t>(h) * w;
  std::vector<double> out(static_cast<std::size_t>(n) * c);
  for (int bb = 0; bb < n; ++bb)
    for (int ch = 0; ch < c; ++ch) {
      const double* src = xn.value.data() + (static_cast<std::int64_t>(bb) * c + ch) * hw;
      double acc = 0.0;
      for (std::int64_t i = 0; i < hw; ++i) acc += src[i];
      out[static_cast<std::size_t>(bb) * c + ch] = acc / static_cast<double>(hw);
    }
  return push(TShape{n, c}, std::move(out), xn.needs_grad, [x, n, c, hw](Tape& t, int self) {
    if (!t.nodes_[static_cast<std::size_t>(x)].needs_grad) return;
    const std::vector<double>& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    std::vector<double>& gx = t.grad_mut(x);
    for (int bb = 0; bb < n; ++bb)
      for (int ch = 0; ch < c; ++ch) {
        const double gv = g[static_cast<std::size_t>(bb) * c + ch] / static_cast<double>(hw);
        double* dst = gx.data() + (static_cast<std::int64_t>(bb) * c + ch) * hw;
        for (std::int64_t i = 0; i < hw; ++i) dst[i] += gv;
      }
  });
}

int Tape::linear(int x, int w, int b) {
  const Node& xn = nodes_[static_cast<std::size_t>(x)];
  const Node& wn = nodes_[static_cast<std::size_t>(w)];
  const Node& bn = nodes_[static_cast<std::size_t>(b)];
  if (xn.shape.rank() != 2 || wn.shape.rank() != 2)
    throw InterfaceError("linear: expects (N,F) input and (C,F) weights");
  const int n = xn.shape.dim(0), f = xn.shape.dim(1), c = wn.shape.dim(0);
  if (wn.shape.dim(1) != f || bn.shape.numel() != c)
    throw InterfaceError("linear: weight/bias shape mismatch");

  std::vector<double> out(static_cast<std::size_t>(n) * c);
  {
    CMapMat xm(xn.value.data(), n, f);
    CMapMat wm(wn.value.data(), c, f);
    MapMat ym(out.data(), n, c);
    ym.noalias() = xm * wm.transpose();
    for (int r = 0; r < n; ++r)
      for (int j = 0; j < c; ++j) ym(r, j) += bn.value[static_cast<std::size_t>(j)];
  }
  const bool any = xn.needs_grad || wn.needs_grad || bn.needs_grad;
  return push(TShape{n, c}, std::move(out), any, [x, w, b, n, f, c](Tape& t, int self) {
    const std::vector<double>& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    CMapMat gm(g.data(), n, c);
    if (t.nodes_[static_cast<std::size_t>(b)].needs_grad) {
      std::vector<double>& gb = t.grad_mut(b);
      for (int j = 0; j < c; ++j) gb[static_cast<std::size_t>(j)] += gm.col(j).sum();
    }
    if (t.nodes_[static_cast<std::size_t>(w)].needs_grad) {
      const Node& xn2 = t.nodes_[static_cast<std::size_t>(x)];
      CMapMat xm(xn2.value.data(), n, f);
      MapMat gwm(t.grad_mut(w).data(), c, f);
      gwm.noalias() += gm.transpose() * xm;
    }
    if (t.nodes_[static_cast<std::size_t>(x)].needs_grad) {
      const Node& wn2 = t.nodes_[static_cast<std::size_t>(w)];
      CMapMat wm(wn2.value.data(), c, f);
      MapMat gxm(t.grad_mut(x).data(), n, f);
      gxm.noalias() += gm * wm;
    }
  });
}

int Tape::softmax(int logits) {
  const Node& zn = nodes_[static_cast<std::size_t>(logits)];
  if (zn.shape.rank() != 2) throw InterfaceError("softmax: expects (N,C) logits");
  const int n = zn.shape.dim(0), c = zn.shape.dim(1);
  std::vector<double> out(zn.value.size());
  for (int r = 0; r < n; ++r) {
    const double* z = zn.value.data() + static_cast<std::int64_t>(r) * c;
    double* p = out.data() + static_cast<std::int64_t>(r) * c;
    double zmax = z[0];
    for (int j = 1; j < c; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) {
      p[j] = std::exp(z[j] - zmax);
      sum += p[j];
    }
    for (int j = 0; j < c; ++j) p[j] /= sum;
  }
  return push(zn.shape, std::move(out), zn.needs_grad, [logits, n, c](Tape& t, int self) {
    if (!t.nodes_[static_cast<std::size_t>(logits)].needs_grad) return;
    const Node& sn = t.nodes_[static_cast<std::size_t>(self)];
    std::vector<double>& gz = t.grad_mut(logits);
    for (int r = 0; r < n; ++r) {
      const double* p = sn.value.data() + static_cast<std::int64_t>(r) * c;
      const double* g = sn.grad.data() + static_cast<std::int64_t>(r) * c;
      double dot = 0.0;
      for (int j = 0; j < c; ++j) dot += g[j] * p[j];
      for (int j = 0; j < c; ++j)
        gz[static_cast<std::size_t>(r) * c + j] += p[j] * (g[j] - dot);
    }
  });
}

int Tape::cross_entropy_mean(int logits, const std::vector<int>& labels) {
  const Node& zn = nodes_[static_cast<std::size_t>(logits)];
  if (zn.shape.rank() != 2) throw InterfaceError("cross_entropy_mean: expects (N,C) logits");
  const int n = zn.shape.dim(0), c = zn.shape.dim(1);
  if (static_cast<int>(labels.size()) != n)
    throw InterfaceError("cross_entropy_mean: label count mismatch");
  for (int y : labels)
    if (y < 0 || y >= c) throw InterfaceError("cross_entropy_mean: label out of range");

  auto probs = std::make_shared<std::vector<double>>(zn.value.size());
  double loss = 0.0;
  for (int r = 0; r < n; ++r) {
    const double* z = zn.value.data() + static_cast<std::int64_t>(r) * c;
    double zmax = z[0];
    for (int j = 1; j < c; ++j) zmax = std::max(zmax, z[j]);
    double sum = 0.0;
    for (int j = 0; j < c; ++j) sum += std::exp(z[j] - zmax);
    const double lse = zmax + std::log(sum);
    loss += lse - z[labels[static_cast<std::size_t>(r)]];
    for (int j = 0; j < c; ++j)
      (*probs)[static_cast<std::size_t>(r) * c + j] = std::exp(z[j] - lse);
  }
  loss /= static_cast<double>(n);

  std::vector<int> yl = labels;
  return push(TShape{}, {loss}, zn.needs_grad,
              [logits, n, c, probs, yl = std::move(yl)](Tape& t, int self) {
                if (!t.nodes_[static_cast<std::size_t>(logits)].needs_grad) return;
                const double g = t.nodes_[static_cast<std::size_t>(self)].grad[0];
                std::vector<double>& gz = t.grad_mut(logits);
                for (int r = 0; r < n; ++r)
                  for (int j = 0; j < c; ++j) {
                    double d = (*probs)[static_cast<std::size_t>(r) * c + j];
                    if (j == yl[static_cast<std::size_t>(r)]) d -= 1.0;
                    gz[static_cast<std::size_t>(r) * c + j] += g * d / static_cast<double>(n);
                  }
              });
}

int Tape::pick_sum(int x, const std::vector<std::pair<int, int>>& coords) {
  const Node& xn = nodes_[static_cast<std::size_t>(x)];
  if (xn.shape.rank() != 2) throw InterfaceError("pick_sum: expects a rank-2 node");
  const int rows = xn.shape.dim(0), cols = xn.shape.dim(1);
  double v = 0.0;
  for (auto [r, c] : coords) {
    if (r < 0 || r >= rows || c < 0 || c >= cols)
      throw InterfaceError("pick_sum: coordinate out of range");
    v += xn.value[static_cast<std::size_t>(r) * cols + c];
  }
  std::vector<std::pair<int, int>> cc = coords;
  return push(TShape{}, {v}, xn.needs_grad, [x, cols, cc = std::move(cc)](Tape& t, int self) {
    if (!t.nodes_[static_cast<std::size_t>(x)].needs_grad) return;
    const double g = t.nodes_[static_cast<std::size_t>(self)].grad[0];
    std::vector<double>& gx = t.grad_mut(x);
    for (auto [r, c] : cc) gx[static_cast<std::size_t>(r) * cols + c] += g;
  });
}

int Tape::cw_objective(int logits, int ref_class, double kappa, bool targeted) {
  const Node& zn = nodes_[static_cast<std::size_t>(logits)];
  if (zn.shape.rank() != 2 || zn.shape.dim(0) != 1)
    throw InterfaceError("cw_objective: expects single-row logits");
  const int c = zn.shape.dim(1);
  if (ref_class < 0 || ref_class >= c) throw InterfaceError("cw_objective: class out of range");
  const double* z = zn.value.data();
  int other = -1;
  for (int j = 0; j < c; ++j) {
    if (j == ref_class) continue;
    if (other < 0 || z[j] > z[other]) other = j;
  }
  const double margin = targeted ? z[other] - z[ref_class] : z[ref_class] - z[other];
  const double v = std::max(margin, -kappa);
  const bool active = margin > -kappa;
  return push(TShape{}, {v}, zn.needs_grad,
              [logits, ref_class, other, targeted, active](Tape& t, int self) {
                if (!t.nodes_[static_cast<std::size_t>(logits)].needs_grad) return;
                const double g = t.nodes_[static_cast<std::size_t>(self)].grad[0];
                // Touch the logits gradient even in the flat region of the
                // hinge so a zero gradient propagates to the input instead of
                // leaving it unset.
                std::vector<double>& gz = t.grad_mut(logits);
                if (!active) return;
                if (targeted) {
                  gz[static_cast<std::size_t>(other)] += g;
                  gz[static_cast<std::size_t>(ref_class)] -= g;
                } else {
                  gz[static_cast<std::size_t>(ref_class)] += g;
                  gz[static_cast<std::size_t>(other)] -= g;
                }
              });
}

}  // namespace sabre::nn
