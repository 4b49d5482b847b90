#include "ffl/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ffl/crypto.hpp"
#include "ffl/errors.hpp"
#include "ffl/params.hpp"

namespace ffl {

std::vector<double> extract_gradient(std::span<const double> w_global,
                                     std::span<const double> w_k, double eta) {
  if (eta <= 0.0) throw std::domain_error("eta must be positive");
  if (w_global.size() != w_k.size()) throw ShapeError("length mismatch");
  std::vector<double> grad(w_k.size());
  for (std::size_t i = 0; i < w_k.size(); ++i) {
    grad[i] = (w_global[i] - w_k[i]) / eta;
  }
  return grad;
}

double relative_error(std::span<const double> x_hat,
                      std::span<const double> x_true) {
  if (x_hat.size() != x_true.size()) throw ShapeError("length mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x_hat.size(); ++i) {
    const double d = x_hat[i] - x_true[i];
    num += d * d;
    den += x_true[i] * x_true[i];
  }
  if (den == 0.0) throw std::domain_error("zero-norm reference");
  return std::sqrt(num / den);
}

std::vector<double> reconstruct_analytic(const ModelSpec& spec,
                                         std::span<const double> gradient) {
  if (gradient.size() != spec.param_count()) {
    throw ShapeError("gradient length does not match model");
  }
  const int d = spec.input_dim;
  const int rows = spec.kind == ModelKind::softmax_regression
                       ? spec.num_classes
                       : spec.hidden;
  const std::size_t bias_off = static_cast<std::size_t>(rows) * d;

  // Strongest usable row: largest |db_r|.
  int best = -1;
  double best_abs = 1e-9;
  for (int r = 0; r < rows; ++r) {
    const double b = std::abs(gradient[bias_off + r]);
    if (b > best_abs) {
      best_abs = b;
      best = r;
    }
  }
  if (best < 0) {
    throw std::domain_error("reconstruction infeasible: bias gradients ~ 0");
  }
  const double g = gradient[bias_off + best];
  std::vector<double> x(d);
  for (int i = 0; i < d; ++i) {
    x[i] = gradient[static_cast<std::size_t>(best) * d + i] / g;
  }
  return x;
}

namespace {

double cosine_objective(const ModelSpec& spec, std::span<const double> target,
                        std::span<const double> w,
                        std::span<const double> x, int label) {
  Dataset one;
  one.features.push_back(std::vector<double>(x.begin(), x.end()));
  one.labels.push_back(label);
  one.num_classes = spec.num_classes;
  const auto dummy = loss_gradient(spec, w, one);
  double tt = 0.0, dd = 0.0, td = 0.0;
  for (std::size_t i = 0; i < dummy.size(); ++i) {
    tt += target[i] * target[i];
    dd += dummy[i] * dummy[i];
    td += target[i] * dummy[i];
  }
  if (tt == 0.0 || dd == 0.0) return 1.0;
  return 1.0 - td / (std::sqrt(tt) * std::sqrt(dd));
}

}  // namespace

GradientMatchResult reconstruct_gradient_matching(
    const ModelSpec& spec, std::span<const double> grad_target,
    std::span<const double> w_global, int steps, DetRng& rng,
    std::optional<std::vector<double>> x_init) {
  if (spec.input_dim > 16) {
    throw std::domain_error("gradient matching is limited to dim <= 16");
  }
  const int d = spec.input_dim;
  constexpr double kTol = 1e-9;

  GradientMatchResult best;
  best.objective = std::numeric_limits<double>::infinity();

  for (int label = 0; label < spec.num_classes; ++label) {
    std::vector<double> x(d);
    if (x_init.has_value()) {
      x = *x_init;
    } else {
      for (auto& v : x) v = rng.normal();
    }
    double obj = cosine_objective(spec, grad_target, w_global, x, label);
    double step = 0.25;
    constexpr double kFd = 1e-4;

    for (int it = 0; it < steps && obj > kTol; ++it) {
      // Central finite-difference gradient of the objective in x.
      std::vector<double> g(d);
      double gnorm2 = 0.0;
      for (int i = 0; i < d; ++i) {
        std::vector<double> xp = x, xm = x;
        xp[i] += kFd;
        xm[i] -= kFd;
        g[i] = (cosine_objective(spec, grad_target, w_global, xp, label) -
                cosine_objective(spec, grad_target, w_global, xm, label)) /
               (2.0 * kFd);
        gnorm2 += g[i] * g[i];
      }
      if (gnorm2 == 0.0) break;
      const double gnorm = std::sqrt(gnorm2);
      std::vector<double> trial(d);
      for (int i = 0; i < d; ++i) trial[i] = x[i] - step * g[i] / gnorm;
      const double trial_obj =
          cosine_objective(spec, grad_target, w_global, trial, label);
      if (trial_obj < obj) {
        x = std::move(trial);
        obj = trial_obj;
        step = std::min(step * 1.3, 4.0);
      } else {
        step *= 0.5;
        if (step < 1e-10) break;
      }
    }
    if (obj < best.objective) {
      best.objective = obj;
      best.x_hat = x;
      best.label = label;
    }
  }
  best.converged = best.objective <= 1e-6;
  return best;
}

double survival_probability(unsigned u) { return std::pow(0.5, u); }

double survival_empirical(unsigned u, std::size_t trials, std::uint64_t seed,
                          std::size_t n_params) {
  if (u > n_params) throw std::domain_error("u exceeds the coordinate count");
  DetRng rng(seed);
  std::size_t survived = 0;
  std::vector<std::uint8_t> secret(32);
  for (std::size_t t = 0; t < trials; ++t) {
    rng.fill(secret);
    const BitMask mask = derive_mask(secret, n_params);
    // A coordinate of the originator's update survives in its own mix where
    // the mask bit is 0; the fixed set is the first u coordinates.
    bool all = true;
    for (unsigned i = 0; i < u && all; ++i) all = !mask.test(i);
    if (all) ++survived;
  }
  return trials == 0 ? 0.0
                     : static_cast<double>(survived) /
                           static_cast<double>(trials);
}

}  // namespace ffl
