// Command-line front end: `run` drives a full simulation from a config file,
// `commtime` evaluates the communication-time model, `attack-demo` runs the
// gradient-inversion probes against original and mixed gradients.

#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ffl/crypto.hpp"
#include "ffl/exchange.hpp"
#include "ffl/privacy.hpp"
#include "ffl/rng.hpp"
#include "ffl/sim/commtime.hpp"
#include "ffl/sim/report.hpp"
#include "ffl/sim/simulation.hpp"
#include "ffl/training.hpp"

namespace {

struct RunOptions {
  std::string config_path;
  std::string out_path = "report.json";
  std::string csv_path;
  std::optional<std::string> defense;
  std::optional<std::string> attack;
  std::optional<int> strategy;
  std::optional<double> sigma;
  std::optional<std::string> flip;
  std::optional<double> attackers;
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
  bool quiet = false;
};

int cmd_run(const RunOptions& opt) {
  ffl::sim::SimConfig cfg;
  if (!opt.config_path.empty()) {
    cfg = ffl::sim::SimConfig::from_json_file(opt.config_path);
  }
  if (opt.defense) cfg.defense.kind = ffl::defense_from_string(*opt.defense);
  if (opt.attack) {
    cfg.attack.kind = ffl::AttackConfig::kind_from_string(*opt.attack);
  }
  if (opt.strategy) cfg.attack.strategy = *opt.strategy;
  if (opt.sigma) cfg.attack.sigma = *opt.sigma;
  if (opt.flip) {
    const auto colon = opt.flip->find(':');
    if (colon == std::string::npos) {
      throw ffl::ConfigError("--flip expects src:tgt");
    }
    cfg.attack.flip_src = std::stoi(opt.flip->substr(0, colon));
    cfg.attack.flip_tgt = std::stoi(opt.flip->substr(colon + 1));
  }
  if (opt.attackers) cfg.attack.attacker_fraction = *opt.attackers;
  if (opt.seed) cfg.master_seed = *opt.seed;
  if (opt.rounds) cfg.T = *opt.rounds;
  cfg.validate();

  ffl::sim::Simulation sim(cfg);
  ffl::sim::SimulationReport report;
  report.config = cfg;
  for (int t = 0; t < cfg.T; ++t) {
    report.rounds.push_back(sim.run_round());
    const auto& r = report.rounds.back();
    if (!opt.quiet) {
      std::printf("round %3d  TE %.4f  All-Acc %.4f", r.round, r.test_error,
                  r.all_acc);
      if (r.src_acc) std::printf("  Src-Acc %.4f", *r.src_acc);
      if (r.asr) std::printf("  ASR %.4f", *r.asr);
      if (r.aggregation_failed) std::printf("  [aggregation failed]");
      std::printf("\n");
    }
  }
  ffl::sim::write_report_json(report, opt.out_path);
  if (!opt.csv_path.empty()) {
    ffl::sim::write_metrics_csv(report, opt.csv_path);
  }
  if (!opt.quiet) std::printf("report written to %s\n", opt.out_path.c_str());
  return 0;
}

int cmd_commtime(const std::string& framework, double model_bits, double down,
                 double up, double latency, std::uint64_t n) {
  ffl::sim::CostModelInput input;
  input.framework = ffl::sim::framework_from_string(framework);
  input.model_bits = model_bits;
  input.down_mbps = down;
  input.up_mbps = up;
  input.latency_s = latency;
  input.n_participants = n;
  const auto t = ffl::sim::comm_time(input);
  std::printf("sp      %.4f s\n", t.sp_s);
  std::printf("pp      %.4f s\n", t.pp_s);
  std::printf("latency %.4f s\n", t.latency_s);
  std::printf("total   %.4f\n", t.total_s);
  return 0;
}

// Builds a one-step single-example federated update, mixes it with a partner
// through the real exchange, and reports reconstruction error for both the
// original (fl) and the mixed (ffl) gradient.
int cmd_attack_demo(const std::string& method, const std::string& source,
                    int dim, int seeds, int steps) {
  using namespace ffl;
  const ModelSpec spec = ModelSpec::softmax(dim, 2);
  const auto& group = DhGroup::named("modp2048-256");
  const ServerKeyPair server_key = ServerKeyPair::generate();
  const double eta = 0.5;

  const bool want_fl = source == "fl" || source == "both";
  const bool want_ffl = source == "ffl" || source == "both";
  const bool want_analytic = method == "analytic" || method == "both";
  const bool want_matching = method == "gradient_matching" || method == "both";

  std::printf("%-18s %-6s %10s\n", "method", "source", "rel_error");
  auto report_row = [](const char* m, const char* s, double err) {
    std::printf("%-18s %-6s %10.4f\n", m, s, err);
  };

  auto median_of = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };

  std::vector<double> analytic_fl, analytic_ffl, match_fl, match_ffl;
  for (int s = 0; s < seeds; ++s) {
    DetRng rng(static_cast<std::uint64_t>(s) + 1);
    auto wrng = rng.fork("w");
    const ParamWords w_global = init_params(spec, wrng);
    const auto w0 = w_global.to_doubles();

    // Two participants, one private example each, one full-batch step.
    Dataset da, db;
    da.num_classes = db.num_classes = 2;
    std::vector<double> xa(dim), xb(dim);
    for (auto& v : xa) v = rng.uniform(0.5, 2.0);
    for (auto& v : xb) v = rng.uniform(0.5, 2.0);
    da.features.push_back(xa);
    da.labels.push_back(0);
    db.features.push_back(xb);
    db.labels.push_back(1);

    TrainConfig tc;
    tc.epochs = 1;
    tc.batch_size = 1;
    tc.eta = eta;
    tc.seed = rng.next_u64();
    const ParamWords wa = train_local(w_global, spec, da, tc);
    const ParamWords wb = train_local(w_global, spec, db, tc);

    // fl: the server sees the original update.
    const auto grad_fl = extract_gradient(w0, wa.to_doubles(), eta);
    // ffl: the server sees the decrypted mixed update.
    InitiatorSession init(group, server_key.public_key(), 0, wa,
                          rng.fork("i"));
    AcceptorSession acc(group, server_key.public_key(), 1, wb, rng.fork("a"));
    auto hello = init.hello();
    auto payload = acc.respond(hello);
    auto [sub_a, ret] = init.finalize(payload);
    const ParamWords mixed = server_decrypt(sub_a, server_key);
    const auto grad_ffl = extract_gradient(w0, mixed.to_doubles(), eta);

    if (want_analytic) {
      if (want_fl) {
        const auto xr = reconstruct_analytic(spec, grad_fl);
        analytic_fl.push_back(relative_error(xr, xa));
      }
      if (want_ffl) {
        try {
          const auto xr = reconstruct_analytic(spec, grad_ffl);
          analytic_ffl.push_back(relative_error(xr, xa));
        } catch (const std::domain_error&) {
          analytic_ffl.push_back(1.0);  // nothing recoverable
        }
      }
    }
    if (want_matching) {
      auto mrng = rng.fork("match");
      if (want_fl) {
        const auto r = reconstruct_gradient_matching(spec, grad_fl, w0, steps,
                                                     mrng);
        match_fl.push_back(relative_error(r.x_hat, xa));
      }
      if (want_ffl) {
        const auto r = reconstruct_gradient_matching(spec, grad_ffl, w0,
                                                     steps, mrng);
        match_ffl.push_back(relative_error(r.x_hat, xa));
      }
    }
  }

  if (!analytic_fl.empty()) report_row("analytic", "fl", median_of(analytic_fl));
  if (!analytic_ffl.empty())
    report_row("analytic", "ffl", median_of(analytic_ffl));
  if (!match_fl.empty())
    report_row("gradient_matching", "fl", median_of(match_fl));
  if (!match_ffl.empty())
    report_row("gradient_matching", "ffl", median_of(match_ffl));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fragmented federated learning simulator"};
  app.require_subcommand(1);

  RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run a simulation and write a report");
  run->add_option("--config", run_opt.config_path, "JSON config file");
  run->add_option("--out", run_opt.out_path, "Report output path");
  run->add_option("--csv", run_opt.csv_path, "Optional per-round metrics CSV");
  std::string defense, attack, flip;
  int strategy = 0, rounds = 0;
  double sigma = -1, attackers = -1;
  std::uint64_t seed = 0;
  run->add_option("--defense", defense,
                  "ffl | fedavg | median | trimmed_mean | multi_krum");
  run->add_option("--attack", attack, "none | gaussian | label_flip");
  run->add_option("--strategy", strategy, "Attacker strategy 1-3");
  run->add_option("--sigma", sigma, "Gaussian poisoning stddev");
  run->add_option("--flip", flip, "Label flip as src:tgt");
  run->add_option("--attackers", attackers, "Attacker fraction (<= 0.2)");
  run->add_option("--seed", seed, "Master seed");
  run->add_option("--rounds", rounds, "Override round count T");
  run->add_flag("--quiet", run_opt.quiet, "Suppress per-round output");

  auto* commtime = app.add_subcommand(
      "commtime", "One-round communication time for a framework");
  std::string framework = "fl";
  double model_bits = 0, down = 31.01, up = 8.66, latency = 0.029;
  std::uint64_t n_participants = 0;
  commtime->add_option("--framework", framework, "fl | ffl | brea")
      ->required();
  commtime->add_option("--model-bits", model_bits, "Update size in bits")
      ->required();
  commtime->add_option("--down", down, "Download speed, Mbps");
  commtime->add_option("--up", up, "Upload speed, Mbps");
  commtime->add_option("--latency", latency, "One-way latency, seconds");
  commtime->add_option("--n", n_participants, "Participant count (brea)");

  auto* demo = app.add_subcommand(
      "attack-demo", "Reconstruction probes on original vs mixed gradients");
  std::string method = "both", source = "both";
  int dim = 4, demo_seeds = 5, steps = 500;
  demo->add_option("--method", method, "analytic | gradient_matching | both");
  demo->add_option("--source", source, "fl | ffl | both");
  demo->add_option("--dim", dim, "Feature dimension (<= 16)");
  demo->add_option("--seeds", demo_seeds, "Number of seeded trials");
  demo->add_option("--steps", steps, "Gradient-matching step budget");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (run->count("--defense")) run_opt.defense = defense;
      if (run->count("--attack")) run_opt.attack = attack;
      if (run->count("--strategy")) run_opt.strategy = strategy;
      if (run->count("--sigma")) run_opt.sigma = sigma;
      if (run->count("--flip")) run_opt.flip = flip;
      if (run->count("--attackers")) run_opt.attackers = attackers;
      if (run->count("--seed")) run_opt.seed = seed;
      if (run->count("--rounds")) run_opt.rounds = rounds;
      return cmd_run(run_opt);
    }
    if (commtime->parsed()) {
      return cmd_commtime(framework, model_bits, down, up, latency,
                          n_participants);
    }
    if (demo->parsed()) {
      return cmd_attack_demo(method, source, dim, demo_seeds, steps);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
