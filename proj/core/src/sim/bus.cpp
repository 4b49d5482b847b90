#include "ffl/sim/bus.hpp"

namespace ffl::sim {

void MessageBus::transfer(int from, int to, PayloadKind kind,
                          std::uint64_t bits) {
  (void)kind;
  traffic_[from].sent_bits += bits;
  traffic_[to].recv_bits += bits;
}

RoleTraffic MessageBus::traffic(int role) const {
  const auto it = traffic_.find(role);
  return it == traffic_.end() ? RoleTraffic{} : it->second;
}

}  // namespace ffl::sim
