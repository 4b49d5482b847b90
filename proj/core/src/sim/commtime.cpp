#include "ffl/sim/commtime.hpp"

#include <stdexcept>

#include "ffl/errors.hpp"

namespace ffl::sim {

Framework framework_from_string(const std::string& name) {
  if (name == "fl") return Framework::fl;
  if (name == "ffl") return Framework::ffl;
  if (name == "brea") return Framework::brea;
  throw ConfigError("unknown framework: " + name);
}

CommTime comm_time(const CostModelInput& input) {
  if (input.down_mbps <= 0.0 || input.up_mbps <= 0.0) {
    throw std::domain_error("link speeds must be positive");
  }
  if (input.latency_s < 0.0) {
    throw std::domain_error("latency must be non-negative");
  }
  const double d_mbit = input.model_bits / 1e6;
  constexpr double kDhMbit = 2048.0 / 1e6;
  constexpr double kSeedMbit = 3072.0 / 1e6;
  constexpr double kScalarMbit = 32.0 / 1e6;

  CommTime t;
  switch (input.framework) {
    case Framework::fl:
      t.sp_s = d_mbit / input.down_mbps + d_mbit / input.up_mbps;
      t.pp_s = 0.0;
      t.latency_s = 2.0 * input.latency_s;
      break;
    case Framework::ffl:
      t.sp_s = (d_mbit + kScalarMbit) / input.down_mbps +
               (d_mbit + kSeedMbit) / input.up_mbps;
      t.pp_s = (4.0 * d_mbit + 2.0 * kDhMbit + 2.0 * kSeedMbit) /
               input.up_mbps;
      t.latency_s = 6.0 * input.latency_s;
      break;
    case Framework::brea: {
      const auto n = static_cast<double>(input.n_participants);
      t.sp_s = d_mbit / input.down_mbps +
               (d_mbit + kScalarMbit * n) / input.up_mbps;
      t.pp_s = 2.0 * d_mbit * n / input.up_mbps;
      t.latency_s = (3.0 + 2.0 * n) * input.latency_s;
      break;
    }
  }
  t.total_s = t.sp_s + t.pp_s + t.latency_s;
  return t;
}

}  // namespace ffl::sim
