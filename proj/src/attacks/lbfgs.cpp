#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "sabre/attacks/attacks.hpp"
#include "sabre/errors.hpp"

namespace sabre::attacks {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Pair {
  std::vector<double> s, y;
  double rho;
};

}  // namespace

BoxLbfgsResult minimize_box_lbfgs(
    const std::function<double(const std::vector<double>&, std::vector<double>*)>& fg,
    std::vector<double> x0, const BoxLbfgsOptions& opt) {
  if (opt.memory < 1) throw ConfigError("minimize_box_lbfgs: memory must be >= 1");
  if (opt.hi <= opt.lo) throw ConfigError("minimize_box_lbfgs: empty box");
  const std::size_t n = x0.size();
  auto project = [&](std::vector<double>& z) {
    for (double& v : z) v = std::clamp(v, opt.lo, opt.hi);
  };
  project(x0);

  BoxLbfgsResult res;
  res.x = std::move(x0);
  std::vector<double> g(n);
  res.fval = fg(res.x, &g);
  res.grad_evals = 1;

  std::deque<Pair> hist;
  std::vector<double> q(n), d(n), xn(n), gn(n);

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    // Projected gradient: components pushing out of an active bound are
    // inert, so they do not count toward convergence.
    double pgn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double gi = g[i];
      if ((res.x[i] <= opt.lo && gi > 0.0) || (res.x[i] >= opt.hi && gi < 0.0)) gi = 0.0;
      pgn += gi * gi;
    }
    if (std::sqrt(pgn) < opt.tol) break;

    // Two-loop recursion for d = -H g.
    q = g;
    std::vector<double> alpha(hist.size());
    for (int i = static_cast<int>(hist.size()) - 1; i >= 0; --i) {
      alpha[i] = hist[i].rho * dot(hist[i].s, q);
      for (std::size_t k = 0; k < n; ++k) q[k] -= alpha[i] * hist[i].y[k];
    }
    if (!hist.empty()) {
      const Pair& last = hist.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& v : q) v *= gamma;
    }
    for (std::size_t i = 0; i < hist.size(); ++i) {
      const double beta = hist[i].rho * dot(hist[i].y, q);
      for (std::size_t k = 0; k < n; ++k) q[k] += (alpha[i] - beta) * hist[i].s[k];
    }
    for (std::size_t k = 0; k < n; ++k) d[k] = -q[k];
    if (dot(d, g) >= 0.0)  // not a descent direction: fall back to steepest
      for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];

    // Projected backtracking line search with an Armijo-style acceptance on
    // the actually-taken (projected) step.
    double t = 1.0;
    bool accepted = false;
    double fn = res.fval;
    for (int ls = 0; ls < 40 && !accepted; ++ls, t *= 0.5) {
      for (std::size_t k = 0; k < n; ++k) xn[k] = res.x[k] + t * d[k];
      project(xn);
      double move = 0.0, gdx = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double dx = xn[k] - res.x[k];
        move += dx * dx;
        gdx += g[k] * dx;
      }
      if (move == 0.0) continue;  // projection swallowed the whole step
      fn = fg(xn, nullptr);
      if (fn <= res.fval + 1e-4 * std::min(gdx, 0.0)) accepted = true;
    }
    if (!accepted) break;

    const double fprev = res.fval;
    res.fval = fg(xn, &gn);
    ++res.grad_evals;
    ++res.iterations;

    std::vector<double> s(n), y(n);
    for (std::size_t k = 0; k < n; ++k) {
      s[k] = xn[k] - res.x[k];
      y[k] = gn[k] - g[k];
    }
    const double sy = dot(s, y);
    if (sy > 1e-12) {
      hist.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(hist.size()) > opt.memory) hist.pop_front();
    }
    res.x = xn;
    g = gn;
    if (std::abs(fprev - res.fval) <= 1e-12 * (1.0 + std::abs(fprev))) break;
  }
  return res;
}

AdvOutcome lbfgs_attack(const nn::DifferentiableClassifier& model, const std::vector<double>& x,
                        int label, int target, const AttackSpec& spec) {
  validate(spec);
  if (spec.algorithm != Algorithm::LBFGS) throw ConfigError("lbfgs_attack: spec.algorithm mismatch");
  if (static_cast<int>(x.size()) != model.input_dim())
    throw InterfaceError("lbfgs_attack: input size != model input_dim");
  if (target < 0 || target >= model.classes() || target == label)
    throw InterfaceError("lbfgs_attack: target must be a class other than the original label");

  const int dim = static_cast<int>(x.size());
  AdvOutcome out;
  out.original_class = label;
  out.target_class = target;

  Mat row(1, dim);
  double c = 1e-3;

  // Objective for a given c: c * smoothed l2 distortion + cross-entropy at
  // the target label. Distance gradients are computed in closed form; only
  // the cross-entropy part spends a batch gradient unit.
  auto make_fg = [&](double c_now) {
    return [&, c_now](const std::vector<double>& z, std::vector<double>* gout) -> double {
      row.v = z;
      const Mat logits = model.forward(row);
      double mx = logits(0, 0);
      for (int j = 1; j < logits.cols; ++j) mx = std::max(mx, logits(0, j));
      double lse = 0.0;
      for (int j = 0; j < logits.cols; ++j) lse += std::exp(logits(0, j) - mx);
      const double ce = mx + std::log(lse) - logits(0, target);
      double dsq = 1e-12;
      for (int i = 0; i < dim; ++i) dsq += (z[i] - x[i]) * (z[i] - x[i]);
      const double dist = std::sqrt(dsq);
      if (gout != nullptr) {
        const Mat gce = model.grad_input(row, {target}, {nn::LossKind::CrossEntropy, 0.0});
        out.gradient_cost += 1.0;
        gout->resize(dim);
        for (int i = 0; i < dim; ++i)
          (*gout)[i] = c_now * (z[i] - x[i]) / dist + gce(0, i);
      }
      return c_now * dist + ce;
    };
  };

  BoxLbfgsOptions opt;
  opt.max_iter = spec.max_iter;
  opt.memory = 5;

  double best_l2 = std::numeric_limits<double>::infinity();
  std::vector<double> best_adv;
  int best_pred = -1;
  std::vector<double> fallback;

  auto run_at = [&](double c_now) -> bool {
    const BoxLbfgsResult r = minimize_box_lbfgs(make_fg(c_now), x, opt);
    out.iterations += r.iterations;
    int pred = -1;
    const bool ok = judge_success(model, r.x, label, target, spec, &pred);
    if (ok) {
      double sq = 0.0;
      for (int i = 0; i < dim; ++i) sq += (r.x[i] - x[i]) * (r.x[i] - x[i]);
      if (std::sqrt(sq) < best_l2) {
        best_l2 = std::sqrt(sq);
        best_adv = r.x;
        best_pred = pred;
      }
    } else if (fallback.empty()) {
      fallback = r.x;
    }
    return ok;
  };

  // Ladder: climb c by 10x while the attack still succeeds (larger c means
  // less distortion), then bisect the success/failure boundary.
  constexpr int kMaxDecades = 10;
  double c_success = std::numeric_limits<double>::quiet_NaN();
  double c_fail = std::numeric_limits<double>::quiet_NaN();
  for (int dec = 0; dec <= kMaxDecades; ++dec) {
    if (run_at(c)) {
      c_success = c;
      c *= 10.0;
    } else {
      c_fail = c;
      break;
    }
  }
  if (!std::isnan(c_success) && !std::isnan(c_fail)) {
    for (int b = 0; b < 10; ++b) {
      const double cm = (c_success + c_fail) / 2.0;
      if (run_at(cm))
        c_success = cm;
      else
        c_fail = cm;
    }
  }

  if (!best_adv.empty()) {
    out.success = true;
    out.x_adv = std::move(best_adv);
    out.predicted_class = best_pred;
  } else {
    out.success = false;
    out.x_adv = fallback.empty() ? x : std::move(fallback);
    out.predicted_class = nn::predict(model, out.x_adv).first;
  }
  fill_delta_norms(out, x);
  return out;
}

}  // namespace sabre::attacks
