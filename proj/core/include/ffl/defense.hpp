#pragma once

#include <map>
#include <span>
#include <vector>

#include "ffl/errors.hpp"
#include "ffl/params.hpp"
#include "ffl/rng.hpp"

namespace ffl {

// Weighted trust sum vanished: nothing to aggregate this round.
struct AggregationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// First quartile at fractional rank (n-1)/4 with linear interpolation.
double quartile_q1(std::span<const double> values);
double scalar_median(std::span<const double> values);

// Sc = {k : gamma_k >= Q1(gamma)}; n = max(floor(C*|Sc|), 2); S is a uniform
// random n-subset of Sc, returned in ascending order. Throws ConfigError when
// fewer than two candidates qualify.
std::vector<int> select_participants(double C, std::span<const double> gamma,
                                     DetRng& rng);

// (grad)_mix = (W_t - mixed) / eta.
std::vector<double> extract_mixed_gradient(std::span<const double> w_global,
                                           std::span<const double> mixed,
                                           double eta);

struct SimilarityBreakdown {
  std::vector<double> magnitude;  // ||(grad_k)_mix||
  std::vector<double> ds;         // distance score in [0,1], larger = closer
  std::vector<double> cs;         // normalized last-layer cosine in [0,1]
  std::vector<double> sim;        // alpha*ds + (1-alpha)*cs
  double med_mix = 0.0;           // median of magnitudes
  double q1_sim = 0.0;
};

// Magnitude leg: ds_k = |med - ||g_k|||, then inverted/normalized by the max
// (all 1 when every magnitude equals the median). Direction leg: cosine of
// each last-layer slice against the coordinate-wise median slice, mapped to
// [0,1]; degenerate zero-norm slices score a neutral 0.5.
SimilarityBreakdown compute_similarities(
    const std::vector<std::vector<double>>& mixed_grads,
    const LayerLayout& layout, double alpha);

struct ReputationState {
  std::vector<double> gamma;                // global reputations, size K
  std::vector<std::map<int, double>> zeta;  // local reputations, sparse rows
  std::vector<double> trust;                // last computed trust, size K

  explicit ReputationState(int num_participants)
      : gamma(num_participants, 0.0),
        zeta(num_participants),
        trust(num_participants, 0.0) {}
  int size() const { return static_cast<int>(gamma.size()); }
};

// gamma_k += sim_k - Q1(sim) for every k in S. Returns the per-participant
// feedback deltas aligned with S, which the server also transmits to each k.
std::vector<double> update_global_reputations(ReputationState& state,
                                              std::span<const int> selected,
                                              std::span<const double> sim);

// zeta_{k,partner} += delta. partner < 0 means no exchange partner this round
// (self-submission) and is a no-op.
void update_local_reputation(ReputationState& state, int k, int partner,
                             double delta);

// Q1 of a local-reputation row over the peers it has actually scored; an
// empty row reads as 0. Unscored peers compare as 0 against this.
double zeta_row_q1(const std::map<int, double>& row);

// nu = max(tanh(gamma - Q1(gamma)), 0), elementwise over the given vector.
std::vector<double> trust_vector(std::span<const double> gamma);

// W <- sum_k nu_k * mixed_k / sum_k nu_k * d_k, accumulated in the order
// given (callers pass ascending pseudonym order for determinism). Throws
// AggregationError when the weight sum is zero.
std::vector<double> adaptive_aggregate(
    const std::vector<std::vector<double>>& mixed, std::span<const double> nu,
    std::span<const double> data_weights);

}  // namespace ffl
