#include "ffl/sim/report.hpp"

#include <fstream>

#include "json.hpp"

#include "ffl/errors.hpp"

namespace ffl::sim {

using nlohmann::json;

std::string report_to_json_text(const SimulationReport& report) {
  json j;
  j["schema_version"] = SimulationReport::kSchemaVersion;
  j["config"] = json::parse(report.config.to_json_text());
  json rounds = json::array();
  for (const auto& r : report.rounds) {
    json jr;
    jr["round"] = r.round;
    jr["te"] = r.test_error;
    jr["all_acc"] = r.all_acc;
    jr["src_acc"] = r.src_acc.has_value() ? json(*r.src_acc) : json(nullptr);
    jr["asr"] = r.asr.has_value() ? json(*r.asr) : json(nullptr);
    jr["selected"] = r.selected;
    json pairs = json::array();
    for (const auto& [a, b] : r.pairs) pairs.push_back({a, b});
    jr["pairs"] = pairs;
    jr["self_submitters"] = r.self_submitters;
    jr["rejected"] = r.rejected;
    jr["gamma"] = r.gamma;
    jr["trust"] = r.trust;
    json traffic = json::object();
    for (const auto& [role, t] : r.traffic) {
      traffic[std::to_string(role)] = {{"sent_bits", t.sent_bits},
                                       {"recv_bits", t.recv_bits}};
    }
    jr["traffic"] = traffic;
    jr["aggregation_failed"] = r.aggregation_failed;
    rounds.push_back(std::move(jr));
  }
  j["rounds"] = std::move(rounds);
  return j.dump(2);
}

void write_report_json(const SimulationReport& report,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write report: " + path);
  out << report_to_json_text(report) << "\n";
}

void write_metrics_csv(const SimulationReport& report,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write csv: " + path);
  out << "round,TE,all_acc,src_acc,asr\n";
  out.precision(17);
  for (const auto& r : report.rounds) {
    out << r.round << "," << r.test_error << "," << r.all_acc << ",";
    if (r.src_acc.has_value()) out << *r.src_acc;
    out << ",";
    if (r.asr.has_value()) out << *r.asr;
    out << "\n";
  }
}

}  // namespace ffl::sim
