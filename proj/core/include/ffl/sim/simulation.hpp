#pragma once

#include <vector>

#include "ffl/crypto.hpp"
#include "ffl/defense.hpp"
#include "ffl/params.hpp"
#include "ffl/rng.hpp"
#include "ffl/sim/bus.hpp"
#include "ffl/sim/config.hpp"
#include "ffl/sim/pairing.hpp"
#include "ffl/sim/report.hpp"
#include "ffl/training.hpp"

namespace ffl::sim {

// One federated training task: server, K participants with their shards, and
// the round loop. With the ffl defense every round runs selection, local
// training, pairwise fragment exchange, submission decryption, similarity
// scoring, reputation/trust updates and adaptive aggregation; baseline
// defenses skip the exchange and aggregate plaintext updates.
class Simulation {
 public:
  explicit Simulation(SimConfig cfg);

  RoundReport run_round();
  SimulationReport run_all();

  const SimConfig& config() const { return cfg_; }
  int round_index() const { return round_; }
  const ParamWords& global_model() const { return model_; }
  const ModelSpec& model_spec() const { return spec_; }
  const ReputationState& reputation() const { return reputation_; }
  const std::vector<bool>& attacker_flags() const { return is_attacker_; }
  const Dataset& test_set() const { return test_; }
  const Dataset& shard(int k) const { return shards_.at(k); }

 private:
  struct LocalUpdates {
    ParamWords honest;    // scaled by the participant's weight
    ParamWords poisoned;  // == honest for honest participants
  };

  LocalUpdates train_participant(int k, DetRng& round_rng);
  RoundReport run_ffl_round(DetRng& round_rng);
  RoundReport run_baseline_round(DetRng& round_rng);
  void finish_round(RoundReport& report, const std::vector<double>& new_model,
                    bool aggregation_failed);

  SimConfig cfg_;
  DetRng root_;
  ServerKeyPair server_key_;
  ReputationState reputation_;
  ModelSpec spec_;
  Dataset test_;
  std::vector<Dataset> shards_;          // true local data
  std::vector<Dataset> flipped_shards_;  // label-flipped views for attackers
  std::vector<bool> is_attacker_;
  std::vector<double> weights_;  // d_k as used in scaling/aggregation
  ParamWords model_;
  MessageBus bus_;
  int round_ = 0;
};

SimulationReport run_simulation(const SimConfig& cfg);

}  // namespace ffl::sim
