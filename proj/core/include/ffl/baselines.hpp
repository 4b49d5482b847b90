#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ffl {

enum class DefenseKind { ffl, fedavg, median, trimmed_mean, multi_krum };

DefenseKind defense_from_string(const std::string& name);
std::string to_string(DefenseKind kind);

struct AggregatorChoice {
  DefenseKind kind = DefenseKind::ffl;
  double trim_beta = 0.2;  // trimmed mean, matches the 20% attacker bound
  // multi-Krum: defaults derived from n at call time when unset (f = ceil(n/5),
  // m_select = n - f - 2).
  int krum_f = -1;
  int krum_m = -1;
};

// Plaintext comparison aggregators. All are pure and permutation-invariant up
// to their defining order statistics.

std::vector<double> fedavg(const std::vector<std::vector<double>>& updates,
                           std::span<const double> data_counts);

std::vector<double> aggregate_coordinate_median(
    const std::vector<std::vector<double>>& updates);

// Drops floor(beta*n) values from each side per coordinate, averages the rest.
std::vector<double> trimmed_mean(
    const std::vector<std::vector<double>>& updates, double beta);

// score_k = sum of squared distances to the n-f-2 nearest other updates;
// averages the m_select lowest-scoring updates (ties broken by index).
std::vector<double> multi_krum(const std::vector<std::vector<double>>& updates,
                               std::size_t f, std::size_t m_select);

}  // namespace ffl
