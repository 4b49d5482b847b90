#include "ffl/sim/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "ffl/errors.hpp"

namespace ffl::sim {

using nlohmann::json;

void SimConfig::validate() const {
  if (K < 4) throw ConfigError("K must be >= 4");
  if (C <= 0.0 || C > 1.0) throw ConfigError("C must be in (0, 1]");
  if (T < 1) throw ConfigError("T must be >= 1");
  if (E < 1 || BS < 1) throw ConfigError("E and BS must be >= 1");
  if (eta <= 0.0) throw ConfigError("eta must be positive");
  if (momentum < 0.0) throw ConfigError("momentum must be >= 0");
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0,1]");
  if (model.kind != "softmax" && model.kind != "mlp") {
    throw ConfigError("model.kind must be softmax or mlp");
  }
  if (data.source != "synthetic" && data.source != "csv") {
    throw ConfigError("data.source must be synthetic or csv");
  }
  if (data_weighting != "unit" && data_weighting != "count") {
    throw ConfigError("data_weighting must be unit or count");
  }
  attack.validate();
}

namespace {

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

SimConfig SimConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  SimConfig cfg;
  maybe(j, "K", cfg.K);
  maybe(j, "C", cfg.C);
  maybe(j, "T", cfg.T);
  maybe(j, "E", cfg.E);
  maybe(j, "BS", cfg.BS);
  maybe(j, "eta", cfg.eta);
  maybe(j, "momentum", cfg.momentum);
  maybe(j, "alpha", cfg.alpha);
  maybe(j, "master_seed", cfg.master_seed);
  maybe(j, "dh_group", cfg.dh_group);
  maybe(j, "src_class", cfg.src_class);
  maybe(j, "target_class", cfg.target_class);
  maybe(j, "data_weighting", cfg.data_weighting);
  maybe(j, "force_trust_one", cfg.force_trust_one);

  if (j.contains("defense")) {
    const auto& d = j.at("defense");
    std::string kind = "ffl";
    maybe(d, "kind", kind);
    cfg.defense.kind = defense_from_string(kind);
    maybe(d, "trim_beta", cfg.defense.trim_beta);
    maybe(d, "krum_f", cfg.defense.krum_f);
    maybe(d, "krum_m", cfg.defense.krum_m);
  }
  if (j.contains("attack")) {
    const auto& a = j.at("attack");
    std::string kind = "none";
    maybe(a, "kind", kind);
    cfg.attack.kind = AttackConfig::kind_from_string(kind);
    maybe(a, "sigma", cfg.attack.sigma);
    maybe(a, "flip_src", cfg.attack.flip_src);
    maybe(a, "flip_tgt", cfg.attack.flip_tgt);
    maybe(a, "strategy", cfg.attack.strategy);
    maybe(a, "attacker_fraction", cfg.attack.attacker_fraction);
  }
  if (j.contains("data")) {
    const auto& d = j.at("data");
    maybe(d, "source", cfg.data.source);
    maybe(d, "csv_train", cfg.data.csv_train);
    maybe(d, "csv_test", cfg.data.csv_test);
    maybe(d, "n_train", cfg.data.n_train);
    maybe(d, "n_test", cfg.data.n_test);
    maybe(d, "dim", cfg.data.dim);
    maybe(d, "classes", cfg.data.classes);
    maybe(d, "separation", cfg.data.separation);
  }
  if (j.contains("model")) {
    const auto& m = j.at("model");
    maybe(m, "kind", cfg.model.kind);
    maybe(m, "hidden", cfg.model.hidden);
  }
  cfg.validate();
  return cfg;
}

SimConfig SimConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string SimConfig::to_json_text() const {
  json j;
  j["K"] = K;
  j["C"] = C;
  j["T"] = T;
  j["E"] = E;
  j["BS"] = BS;
  j["eta"] = eta;
  j["momentum"] = momentum;
  j["alpha"] = alpha;
  j["master_seed"] = master_seed;
  j["dh_group"] = dh_group;
  j["src_class"] = src_class;
  j["target_class"] = target_class;
  j["data_weighting"] = data_weighting;
  j["force_trust_one"] = force_trust_one;
  j["defense"] = {{"kind", to_string(defense.kind)},
                  {"trim_beta", defense.trim_beta},
                  {"krum_f", defense.krum_f},
                  {"krum_m", defense.krum_m}};
  j["attack"] = {{"kind", attack.kind_name()},
                 {"sigma", attack.sigma},
                 {"flip_src", attack.flip_src},
                 {"flip_tgt", attack.flip_tgt},
                 {"strategy", attack.strategy},
                 {"attacker_fraction", attack.attacker_fraction}};
  j["data"] = {{"source", data.source},     {"csv_train", data.csv_train},
               {"csv_test", data.csv_test}, {"n_train", data.n_train},
               {"n_test", data.n_test},     {"dim", data.dim},
               {"classes", data.classes},   {"separation", data.separation}};
  j["model"] = {{"kind", model.kind}, {"hidden", model.hidden}};
  return j.dump(2);
}

}  // namespace ffl::sim
