#include "ffl/sim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ffl/adversary.hpp"
#include "ffl/baselines.hpp"
#include "ffl/exchange.hpp"

namespace ffl::sim {

namespace {

std::uint64_t payload_bits(const ParamWords& w) {
  return static_cast<std::uint64_t>(w.size()) * 32;
}

std::uint64_t bytes_bits(const std::vector<std::uint8_t>& b) {
  return static_cast<std::uint64_t>(b.size()) * 8;
}

SimConfig validated(SimConfig cfg) {
  cfg.validate();
  return cfg;
}

}  // namespace

Simulation::Simulation(SimConfig cfg)
    : cfg_(validated(std::move(cfg))),
      root_(cfg_.master_seed),
      server_key_(ServerKeyPair::generate()),
      reputation_(cfg_.K) {
  spec_ = cfg_.model.kind == "softmax"
              ? ModelSpec::softmax(cfg_.data.dim, cfg_.data.classes)
              : ModelSpec::mlp(cfg_.data.dim, cfg_.model.hidden,
                               cfg_.data.classes);

  Dataset train;
  if (cfg_.data.source == "synthetic") {
    auto data_rng = root_.fork("data");
    train = synth_dataset(data_rng.next_u64(), cfg_.data.n_train,
                          cfg_.data.dim, cfg_.data.classes,
                          cfg_.data.separation);
    test_ = synth_dataset(data_rng.next_u64(), cfg_.data.n_test, cfg_.data.dim,
                          cfg_.data.classes, cfg_.data.separation);
  } else {
    train = load_csv(cfg_.data.csv_train);
    test_ = load_csv(cfg_.data.csv_test);
    cfg_.data.dim = static_cast<int>(train.dim());
    cfg_.data.classes = std::max(train.num_classes, test_.num_classes);
    train.num_classes = test_.num_classes = cfg_.data.classes;
    spec_ = cfg_.model.kind == "softmax"
                ? ModelSpec::softmax(cfg_.data.dim, cfg_.data.classes)
                : ModelSpec::mlp(cfg_.data.dim, cfg_.model.hidden,
                                 cfg_.data.classes);
  }

  auto split_rng = root_.fork("split");
  shards_ = split_uniform(train, cfg_.K, split_rng);

  is_attacker_.assign(cfg_.K, false);
  if (cfg_.attack.kind != AttackConfig::Kind::none) {
    const int n_attackers = static_cast<int>(
        cfg_.attack.attacker_fraction * cfg_.K + 1e-9);
    std::vector<int> ids(cfg_.K);
    for (int k = 0; k < cfg_.K; ++k) ids[k] = k;
    auto attacker_rng = root_.fork("attackers");
    attacker_rng.shuffle(ids);
    for (int i = 0; i < n_attackers; ++i) is_attacker_[ids[i]] = true;
  }

  flipped_shards_.resize(cfg_.K);
  if (cfg_.attack.kind == AttackConfig::Kind::label_flip) {
    for (int k = 0; k < cfg_.K; ++k) {
      if (is_attacker_[k]) {
        flipped_shards_[k] =
            flip_labels(shards_[k], cfg_.attack.flip_src, cfg_.attack.flip_tgt);
      }
    }
  }

  weights_.assign(cfg_.K, 1.0);
  if (cfg_.data_weighting == "count") {
    for (int k = 0; k < cfg_.K; ++k) {
      weights_[k] = static_cast<double>(shards_[k].size());
    }
  }

  auto init_rng = root_.fork("init");
  model_ = init_params(spec_, init_rng);
}

Simulation::LocalUpdates Simulation::train_participant(int k,
                                                       DetRng& round_rng) {
  TrainConfig tc;
  tc.epochs = cfg_.E;
  tc.batch_size = cfg_.BS;
  tc.eta = cfg_.eta;
  tc.momentum = cfg_.momentum;
  tc.seed = round_rng.fork("train", static_cast<std::uint64_t>(k)).next_u64();

  const ParamWords honest = train_local(model_, spec_, shards_[k], tc);
  ParamWords poisoned = honest;
  if (is_attacker_[k]) {
    switch (cfg_.attack.kind) {
      case AttackConfig::Kind::gaussian: {
        auto prng = round_rng.fork("poison", static_cast<std::uint64_t>(k));
        poisoned = poison_gaussian(honest, cfg_.attack.sigma, prng);
        break;
      }
      case AttackConfig::Kind::label_flip:
        poisoned = train_local(model_, spec_, flipped_shards_[k], tc);
        break;
      case AttackConfig::Kind::none:
        break;
    }
  }
  const double d_k = weights_[k];
  return LocalUpdates{scale(honest, d_k), scale(poisoned, d_k)};
}

RoundReport Simulation::run_ffl_round(DetRng& round_rng) {
  RoundReport report;
  report.round = round_;
  const auto& group = DhGroup::named(cfg_.dh_group);
  const ServerPublicKey pk = server_key_.public_key();

  auto select_rng = round_rng.fork("select");
  report.selected = select_participants(cfg_.C, reputation_.gamma, select_rng);

  // Model broadcast to the selected set; the public board is `selected`.
  for (const int k : report.selected) {
    bus_.transfer(MessageBus::kServer, k, PayloadKind::model_broadcast,
                  payload_bits(model_));
  }

  std::map<int, LocalUpdates> updates;
  for (const int k : report.selected) {
    updates.emplace(k, train_participant(k, round_rng));
  }

  auto pair_rng = round_rng.fork("pair");
  PairingResult pairing =
      pair_participants(report.selected, reputation_.zeta, pair_rng);
  report.pairs = pairing.pairs;
  report.self_submitters = pairing.unmatched;

  std::map<int, int> partner;
  std::map<int, MixedSubmission> submissions;

  for (const auto& [k, j] : pairing.pairs) {
    partner[k] = j;
    partner[j] = k;
    const auto& upd_k = updates.at(k);
    const auto& upd_j = updates.at(j);
    const AttackerPlan plan_k =
        is_attacker_[k] ? attacker_behavior(cfg_.attack.strategy, upd_k.honest,
                                            upd_k.poisoned)
                        : AttackerPlan{upd_k.honest, upd_k.honest, false};
    const AttackerPlan plan_j =
        is_attacker_[j] ? attacker_behavior(cfg_.attack.strategy, upd_j.honest,
                                            upd_j.poisoned)
                        : AttackerPlan{upd_j.honest, upd_j.honest, false};

    InitiatorSession initiator(
        group, pk, k, plan_k.mix_basis,
        round_rng.fork("sess-i", static_cast<std::uint64_t>(k)));
    initiator.set_outgoing_update(plan_k.exchange_update);
    AcceptorSession acceptor(
        group, pk, j, plan_j.mix_basis,
        round_rng.fork("sess-a", static_cast<std::uint64_t>(j)));
    acceptor.set_outgoing_update(plan_j.exchange_update);

    InitiatorHello hello = initiator.hello();
    bus_.transfer(k, j, PayloadKind::exchange_hello,
                  bytes_bits(hello.dh_pub) + bytes_bits(hello.enc_seed));

    AcceptorPayload payload = acceptor.respond(hello);
    bus_.transfer(j, k, PayloadKind::exchange_payload,
                  bytes_bits(payload.dh_pub) + bytes_bits(payload.enc_seed) +
                      payload_bits(payload.c_full) +
                      payload_bits(payload.c_frag));

    auto [sub_k, ret] = initiator.finalize(payload);
    bus_.transfer(k, j, PayloadKind::exchange_return,
                  payload_bits(ret.c_full) + payload_bits(ret.c_frag));

    MixedSubmission sub_j = acceptor.finalize(ret);

    // Strategy 2: the submission body is the fully poisoned update encrypted
    // under the legitimately swapped pad, so the server still decrypts it.
    if (plan_k.submit_full_poison) {
      sub_k.enc_mixed =
          xor_words(upd_k.poisoned, gen_otp(acceptor.seed_r(), model_.layout()));
    }
    if (plan_j.submit_full_poison) {
      sub_j.enc_mixed = xor_words(upd_j.poisoned,
                                  gen_otp(initiator.seed_r(), model_.layout()));
    }

    bus_.transfer(k, MessageBus::kServer, PayloadKind::submission,
                  payload_bits(sub_k.enc_mixed) +
                      bytes_bits(sub_k.enc_partner_seed));
    bus_.transfer(j, MessageBus::kServer, PayloadKind::submission,
                  payload_bits(sub_j.enc_mixed) +
                      bytes_bits(sub_j.enc_partner_seed));
    submissions.emplace(k, std::move(sub_k));
    submissions.emplace(j, std::move(sub_j));
  }

  for (const int k : pairing.unmatched) {
    const auto& upd = updates.at(k);
    // An unmatched attacker still pushes its intended submission content.
    const ParamWords& w =
        is_attacker_[k] && cfg_.attack.strategy != 3 ? upd.poisoned
                                                     : upd.honest;
    MixedSubmission sub = self_submission(
        pk, k, w, round_rng.fork("self", static_cast<std::uint64_t>(k)));
    bus_.transfer(k, MessageBus::kServer, PayloadKind::submission,
                  payload_bits(sub.enc_mixed) +
                      bytes_bits(sub.enc_partner_seed));
    submissions.emplace(k, std::move(sub));
  }

  // Server side: decrypt, score, update reputations, aggregate.
  std::vector<int> senders;
  std::vector<std::vector<double>> mixes;
  for (const auto& [k, sub] : submissions) {  // ascending pseudonym
    try {
      mixes.push_back(server_decrypt(sub, server_key_).to_doubles());
      senders.push_back(k);
    } catch (const CryptoError&) {
      report.rejected.push_back(k);
    }
  }

  bool failed = false;
  std::vector<double> new_model;
  if (senders.size() < 2) {
    failed = true;
  } else {
    const std::vector<double> w_global = model_.to_doubles();
    std::vector<std::vector<double>> grads;
    grads.reserve(mixes.size());
    for (const auto& mix : mixes) {
      grads.push_back(extract_mixed_gradient(w_global, mix, cfg_.eta));
    }
    const SimilarityBreakdown sims =
        compute_similarities(grads, spec_.layout(), cfg_.alpha);

    const std::vector<double> deltas =
        update_global_reputations(reputation_, senders, sims.sim);
    for (std::size_t i = 0; i < senders.size(); ++i) {
      const int k = senders[i];
      bus_.transfer(MessageBus::kServer, k, PayloadKind::feedback, 32);
      const auto it = partner.find(k);
      update_local_reputation(reputation_, k,
                              it == partner.end() ? -1 : it->second,
                              deltas[i]);
    }

    reputation_.trust = trust_vector(reputation_.gamma);
    std::vector<double> nu(senders.size());
    std::vector<double> d(senders.size());
    for (std::size_t i = 0; i < senders.size(); ++i) {
      nu[i] = cfg_.force_trust_one
                  ? 1.0
                  : reputation_.trust[static_cast<std::size_t>(senders[i])];
      d[i] = weights_[static_cast<std::size_t>(senders[i])];
    }
    try {
      new_model = adaptive_aggregate(mixes, nu, d);
    } catch (const AggregationError&) {
      failed = true;
    }
  }

  finish_round(report, new_model, failed);
  return report;
}

RoundReport Simulation::run_baseline_round(DetRng& round_rng) {
  RoundReport report;
  report.round = round_;

  auto select_rng = round_rng.fork("select");
  report.selected = select_participants(cfg_.C, reputation_.gamma, select_rng);

  for (const int k : report.selected) {
    bus_.transfer(MessageBus::kServer, k, PayloadKind::model_broadcast,
                  payload_bits(model_));
  }

  // Plaintext submissions of the unscaled updates; the aggregator weighs by
  // data counts where it cares.
  std::vector<std::vector<double>> plain;
  std::vector<double> counts;
  for (const int k : report.selected) {
    TrainConfig tc;
    tc.epochs = cfg_.E;
    tc.batch_size = cfg_.BS;
    tc.eta = cfg_.eta;
    tc.momentum = cfg_.momentum;
    tc.seed =
        round_rng.fork("train", static_cast<std::uint64_t>(k)).next_u64();
    ParamWords update = train_local(model_, spec_, shards_[k], tc);
    if (is_attacker_[k]) {
      switch (cfg_.attack.kind) {
        case AttackConfig::Kind::gaussian: {
          auto prng = round_rng.fork("poison", static_cast<std::uint64_t>(k));
          update = poison_gaussian(update, cfg_.attack.sigma, prng);
          break;
        }
        case AttackConfig::Kind::label_flip:
          update = train_local(model_, spec_, flipped_shards_[k], tc);
          break;
        case AttackConfig::Kind::none:
          break;
      }
    }
    bus_.transfer(k, MessageBus::kServer, PayloadKind::submission,
                  payload_bits(update));
    plain.push_back(update.to_doubles());
    counts.push_back(cfg_.data_weighting == "count"
                         ? static_cast<double>(shards_[k].size())
                         : 1.0);
  }

  std::vector<double> new_model;
  bool failed = false;
  try {
    const std::size_t n = plain.size();
    switch (cfg_.defense.kind) {
      case DefenseKind::fedavg:
        new_model = fedavg(plain, counts);
        break;
      case DefenseKind::median:
        new_model = aggregate_coordinate_median(plain);
        break;
      case DefenseKind::trimmed_mean:
        new_model = trimmed_mean(plain, cfg_.defense.trim_beta);
        break;
      case DefenseKind::multi_krum: {
        const std::size_t f =
            cfg_.defense.krum_f >= 0
                ? static_cast<std::size_t>(cfg_.defense.krum_f)
                : static_cast<std::size_t>(
                      std::ceil(0.2 * static_cast<double>(n)));
        const std::size_t m =
            cfg_.defense.krum_m >= 0
                ? static_cast<std::size_t>(cfg_.defense.krum_m)
                : n - f - 2;
        new_model = multi_krum(plain, f, m);
        break;
      }
      case DefenseKind::ffl:
        throw ConfigError("ffl handled elsewhere");
    }
  } catch (const std::exception&) {
    failed = true;
  }

  finish_round(report, new_model, failed);
  return report;
}

void Simulation::finish_round(RoundReport& report,
                              const std::vector<double>& new_model,
                              bool aggregation_failed) {
  report.aggregation_failed = aggregation_failed;
  if (!aggregation_failed) {
    model_ = ParamWords::from_doubles(new_model, spec_.layout());
  }
  const EvalMetrics metrics =
      evaluate(model_, spec_, test_, cfg_.src_class, cfg_.target_class);
  report.test_error = metrics.test_error;
  report.all_acc = metrics.all_acc;
  report.src_acc = metrics.src_acc;
  report.asr = metrics.asr;
  report.gamma = reputation_.gamma;
  report.trust = reputation_.trust;
  report.traffic = bus_.all_traffic();
  ++round_;
}

RoundReport Simulation::run_round() {
  bus_.reset();
  auto round_rng =
      root_.fork("round", static_cast<std::uint64_t>(round_));
  if (cfg_.defense.kind == DefenseKind::ffl) {
    return run_ffl_round(round_rng);
  }
  return run_baseline_round(round_rng);
}

SimulationReport Simulation::run_all() {
  SimulationReport report;
  report.config = cfg_;
  report.rounds.reserve(cfg_.T);
  for (int t = 0; t < cfg_.T; ++t) {
    report.rounds.push_back(run_round());
  }
  return report;
}

SimulationReport run_simulation(const SimConfig& cfg) {
  Simulation sim(cfg);
  return sim.run_all();
}

}  // namespace ffl::sim
