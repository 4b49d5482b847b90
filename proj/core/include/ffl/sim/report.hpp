#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ffl/sim/bus.hpp"
#include "ffl/sim/config.hpp"

namespace ffl::sim {

struct RoundReport {
  int round = 0;
  double test_error = 0.0;
  double all_acc = 0.0;
  std::optional<double> src_acc;
  std::optional<double> asr;

  std::vector<int> selected;
  std::vector<std::pair<int, int>> pairs;  // (initiator, acceptor)
  std::vector<int> self_submitters;
  std::vector<int> rejected;

  std::vector<double> gamma;  // post-update snapshot, size K
  std::vector<double> trust;  // trust over the full reputation vector, size K

  std::map<int, RoleTraffic> traffic;  // role -> bits (server = -1)
  bool aggregation_failed = false;
};

struct SimulationReport {
  static constexpr int kSchemaVersion = 1;
  SimConfig config;
  std::vector<RoundReport> rounds;
};

std::string report_to_json_text(const SimulationReport& report);
void write_report_json(const SimulationReport& report,
                       const std::string& path);
// CSV columns: round,TE,all_acc,src_acc,asr (blank when undefined).
void write_metrics_csv(const SimulationReport& report,
                       const std::string& path);

}  // namespace ffl::sim
