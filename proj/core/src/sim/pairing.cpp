#include "ffl/sim/pairing.hpp"

#include <algorithm>

#include "ffl/defense.hpp"

namespace ffl::sim {

namespace {

double zeta_of(const std::map<int, double>& row, int peer) {
  const auto it = row.find(peer);
  return it == row.end() ? 0.0 : it->second;
}

}  // namespace

PairingResult pair_participants(
    std::span<const int> selected,
    const std::vector<std::map<int, double>>& zeta, DetRng& rng) {
  PairingResult result;
  std::vector<int> unmatched(selected.begin(), selected.end());
  std::sort(unmatched.begin(), unmatched.end());

  bool progress = true;
  while (progress && unmatched.size() >= 2) {
    progress = false;
    std::vector<int> proposers = unmatched;
    rng.shuffle(proposers);
    for (const int k : proposers) {
      if (std::find(unmatched.begin(), unmatched.end(), k) == unmatched.end())
        continue;
      const auto& row_k = zeta.at(static_cast<std::size_t>(k));
      const double q1_k = zeta_row_q1(row_k);
      std::vector<int> candidates;
      for (const int j : unmatched) {
        if (j != k && zeta_of(row_k, j) >= q1_k) candidates.push_back(j);
      }
      if (candidates.empty()) continue;
      const int j = candidates[rng.below(candidates.size())];
      const auto& row_j = zeta.at(static_cast<std::size_t>(j));
      if (zeta_of(row_j, k) < zeta_row_q1(row_j)) continue;  // j declines
      result.pairs.emplace_back(k, j);
      unmatched.erase(std::remove_if(unmatched.begin(), unmatched.end(),
                                     [&](int v) { return v == k || v == j; }),
                      unmatched.end());
      progress = true;
    }
  }
  result.unmatched = std::move(unmatched);
  return result;
}

}  // namespace ffl::sim
