#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "ffl/rng.hpp"

namespace ffl::sim {

struct PairingResult {
  // (initiator, acceptor) pairs, in formation order.
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> unmatched;
};

// Seeded proposal rounds: every unmatched participant proposes to a random
// unmatched peer whose local reputation clears its own row's Q1; the peer
// accepts on the symmetric check. Passes repeat until one adds no pair.
// Whoever remains (odd sets, universally rejected participants) self-submits.
PairingResult pair_participants(
    std::span<const int> selected,
    const std::vector<std::map<int, double>>& zeta, DetRng& rng);

}  // namespace ffl::sim
