#pragma once

#include <cstdint>
#include <map>

namespace ffl::sim {

enum class PayloadKind {
  model_broadcast,
  exchange_hello,
  exchange_payload,
  exchange_return,
  submission,
  feedback,
};

struct RoleTraffic {
  std::uint64_t sent_bits = 0;
  std::uint64_t recv_bits = 0;
  std::uint64_t total_bits() const { return sent_bits + recv_bits; }
};

// In-process stand-in for the network: typed payloads move by value between
// roles while the bus books their exact wire size. Role -1 is the server,
// other ids are participant pseudonyms.
class MessageBus {
 public:
  static constexpr int kServer = -1;

  void reset() { traffic_.clear(); }
  void transfer(int from, int to, PayloadKind kind, std::uint64_t bits);

  RoleTraffic traffic(int role) const;
  const std::map<int, RoleTraffic>& all_traffic() const { return traffic_; }

 private:
  std::map<int, RoleTraffic> traffic_;
};

}  // namespace ffl::sim
