#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ffl/rng.hpp"
#include "ffl/training.hpp"

namespace ffl {

// grad = (W_global - W_k) / eta, the server-side view of a one-step update.
std::vector<double> extract_gradient(std::span<const double> w_global,
                                     std::span<const double> w_k, double eta);

double relative_error(std::span<const double> x_hat,
                      std::span<const double> x_true);

// Closed-form input recovery from a single-example dense-layer gradient: the
// first layer sees dW = g * x^T and db = g, so any row r with |db_r| above
// threshold yields x = dW_r / db_r. Throws std::domain_error when every bias
// gradient vanishes.
std::vector<double> reconstruct_analytic(const ModelSpec& spec,
                                         std::span<const double> gradient);

struct GradientMatchResult {
  std::vector<double> x_hat;
  int label = -1;
  double objective = 0.0;  // 1 - cos(target, dummy)
  bool converged = false;
};

// Gradient-matching inversion for tiny feature dimensions: minimizes the
// cosine objective over a dummy input by central finite differences with an
// adaptive step, enumerating the label. `steps` bounds the iterations per
// candidate label.
GradientMatchResult reconstruct_gradient_matching(
    const ModelSpec& spec, std::span<const double> grad_target,
    std::span<const double> w_global, int steps, DetRng& rng,
    std::optional<std::vector<double>> x_init = std::nullopt);

// Chance that a fixed set of u coordinates of an update all survive in the
// originator's own mix: exactly (1/2)^u, and its seeded empirical estimate
// over fresh masks.
double survival_probability(unsigned u);
double survival_empirical(unsigned u, std::size_t trials, std::uint64_t seed,
                          std::size_t n_params = 64);

}  // namespace ffl
