#pragma once

#include <cstdint>
#include <string>

namespace ffl::sim {

enum class Framework { fl, ffl, brea };

Framework framework_from_string(const std::string& name);

struct CostModelInput {
  Framework framework = Framework::fl;
  double model_bits = 0.0;   // total update size in bits
  double down_mbps = 31.01;  // download speed
  double up_mbps = 8.66;     // upload speed
  double latency_s = 0.029;  // one-way latency per message
  std::uint64_t n_participants = 0;  // brea peer-to-peer term
};

struct CommTime {
  double sp_s = 0.0;       // server-participant transfer time
  double pp_s = 0.0;       // participant-participant transfer time
  double latency_s = 0.0;  // summed per-message latencies
  double total_s = 0.0;
};

// One-round communication time per participant. fl moves one model down and
// one update up (2 latencies). ffl adds the fragment exchange: the downlink
// carries a 32-bit reputation, the uplink a 3072-bit seed, and peers swap
// 4 update-sized payloads, two 2048-bit group elements and two 3072-bit
// ciphertexts over the upload link (6 latencies). brea uploads a 32n-bit
// distance vector and exchanges 2n update-sized shares (3 + 2n latencies).
CommTime comm_time(const CostModelInput& input);

}  // namespace ffl::sim
