#include "ffl/defense.hpp"

#include <algorithm>
#include <cmath>

namespace ffl {

double quartile_q1(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("quartile of empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double rank = static_cast<double>(sorted.size() - 1) / 4.0;
  const auto lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= sorted.size()) return sorted[lo];
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double scalar_median(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("median of empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  return (n % 2 == 1) ? sorted[n / 2]
                      : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

std::vector<int> select_participants(double C, std::span<const double> gamma,
                                     DetRng& rng) {
  if (C <= 0.0 || C > 1.0) throw ConfigError("C must be in (0, 1]");
  const double q1 = quartile_q1(gamma);
  std::vector<int> candidates;
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    if (gamma[k] >= q1) candidates.push_back(static_cast<int>(k));
  }
  if (candidates.size() < 2) {
    throw ConfigError("fewer than two selectable participants");
  }
  const auto n = std::max<std::size_t>(
      static_cast<std::size_t>(C * static_cast<double>(candidates.size())), 2);
  // Partial Fisher-Yates for a uniform n-subset.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(candidates.size() - i);
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(n);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

std::vector<double> extract_mixed_gradient(std::span<const double> w_global,
                                           std::span<const double> mixed,
                                           double eta) {
  if (eta <= 0.0) throw std::domain_error("learning rate must be positive");
  if (w_global.size() != mixed.size()) {
    throw ShapeError("model/update length mismatch");
  }
  std::vector<double> grad(mixed.size());
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    grad[i] = (w_global[i] - mixed[i]) / eta;
  }
  return grad;
}

SimilarityBreakdown compute_similarities(
    const std::vector<std::vector<double>>& mixed_grads,
    const LayerLayout& layout, double alpha) {
  if (mixed_grads.size() < 2) {
    throw std::domain_error("similarity needs at least two gradients");
  }
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::domain_error("alpha must be in [0, 1]");
  }
  const std::size_t n = mixed_grads.size();
  SimilarityBreakdown out;
  out.magnitude.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.magnitude[k] = l2_norm(mixed_grads[k]);
  }
  out.med_mix = scalar_median(out.magnitude);

  out.ds.resize(n);
  double ds_max = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.ds[k] = std::abs(out.med_mix - out.magnitude[k]);
    ds_max = std::max(ds_max, out.ds[k]);
  }
  if (ds_max == 0.0) {
    std::fill(out.ds.begin(), out.ds.end(), 1.0);
  } else {
    for (auto& d : out.ds) d = 1.0 - d / ds_max;
  }

  std::vector<std::vector<double>> slices(n);
  for (std::size_t k = 0; k < n; ++k) {
    slices[k] = last_layer(mixed_grads[k], layout);
  }
  const std::vector<double> med_slice = coordinate_median(slices);
  const double med_norm = l2_norm(med_slice);

  out.cs.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (med_norm == 0.0 || l2_norm(slices[k]) == 0.0) {
      out.cs[k] = 0.5;  // neutral when the direction is undefined
    } else {
      out.cs[k] = (cosine(slices[k], med_slice) + 1.0) / 2.0;
    }
  }

  out.sim.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.sim[k] = alpha * out.ds[k] + (1.0 - alpha) * out.cs[k];
  }
  out.q1_sim = quartile_q1(out.sim);
  return out;
}

std::vector<double> update_global_reputations(ReputationState& state,
                                              std::span<const int> selected,
                                              std::span<const double> sim) {
  if (selected.size() != sim.size()) {
    throw ShapeError("selected/sim length mismatch");
  }
  const double q1 = quartile_q1(sim);
  std::vector<double> deltas(sim.size());
  for (std::size_t i = 0; i < sim.size(); ++i) {
    deltas[i] = sim[i] - q1;
    state.gamma.at(static_cast<std::size_t>(selected[i])) += deltas[i];
  }
  return deltas;
}

void update_local_reputation(ReputationState& state, int k, int partner,
                             double delta) {
  if (partner < 0) return;
  state.zeta.at(static_cast<std::size_t>(k))[partner] += delta;
}

double zeta_row_q1(const std::map<int, double>& row) {
  if (row.empty()) return 0.0;
  std::vector<double> values;
  values.reserve(row.size());
  for (const auto& [peer, v] : row) values.push_back(v);
  return quartile_q1(values);
}

std::vector<double> trust_vector(std::span<const double> gamma) {
  const double q1 = quartile_q1(gamma);
  std::vector<double> nu(gamma.size());
  for (std::size_t k = 0; k < gamma.size(); ++k) {
    nu[k] = std::max(std::tanh(gamma[k] - q1), 0.0);
  }
  return nu;
}

std::vector<double> adaptive_aggregate(
    const std::vector<std::vector<double>>& mixed, std::span<const double> nu,
    std::span<const double> data_weights) {
  if (mixed.empty()) throw std::domain_error("nothing to aggregate");
  if (mixed.size() != nu.size() || mixed.size() != data_weights.size()) {
    throw ShapeError("mixed/nu/d length mismatch");
  }
  const std::size_t dim = mixed.front().size();
  std::vector<double> acc(dim, 0.0);
  double denom = 0.0;
  for (std::size_t k = 0; k < mixed.size(); ++k) {
    if (mixed[k].size() != dim) throw ShapeError("update length mismatch");
    for (std::size_t i = 0; i < dim; ++i) acc[i] += nu[k] * mixed[k][i];
    denom += nu[k] * data_weights[k];
  }
  if (denom == 0.0) {
    throw AggregationError("all trust weights are zero");
  }
  for (auto& x : acc) x /= denom;
  return acc;
}

}  // namespace ffl
