#pragma once

#include <cstdint>
#include <string>

#include "ffl/adversary.hpp"
#include "ffl/baselines.hpp"

namespace ffl::sim {

struct DataSpec {
  std::string source = "synthetic";  // "synthetic" | "csv"
  std::string csv_train;
  std::string csv_test;
  int n_train = 800;
  int n_test = 2000;
  int dim = 8;
  int classes = 2;
  double separation = 3.0;
};

struct ModelCfg {
  std::string kind = "softmax";  // "softmax" | "mlp"
  int hidden = 16;
};

struct SimConfig {
  int K = 20;        // participants
  double C = 0.5;    // selection fraction
  int T = 30;        // rounds
  int E = 1;         // local epochs
  int BS = 16;       // local batch size
  double eta = 0.1;  // learning rate
  double momentum = 0.0;
  double alpha = 0.2;  // similarity mix weight

  AggregatorChoice defense;
  AttackConfig attack;
  DataSpec data;
  ModelCfg model;

  std::uint64_t master_seed = 1;
  std::string dh_group = "modp2048-256";
  int src_class = 0;
  int target_class = 1;

  // "unit": every participant weighs 1 regardless of shard size (default, and
  // what keeps Eq.-style gradient extraction meaningful). "count": weigh by
  // actual shard sizes; flagged in the report.
  std::string data_weighting = "unit";

  // Test hook: aggregate with every trust weight forced to 1.
  bool force_trust_one = false;

  void validate() const;
  static SimConfig from_json_text(const std::string& text);
  static SimConfig from_json_file(const std::string& path);
  std::string to_json_text() const;
};

}  // namespace ffl::sim
