#include "ffl/adversary.hpp"

#include <stdexcept>

#include "ffl/errors.hpp"

namespace ffl {

void AttackConfig::validate() const {
  if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
  if (kind == Kind::label_flip && flip_src == flip_tgt) {
    throw ConfigError("flip source and target must differ");
  }
  if (strategy < 1 || strategy > 3) throw ConfigError("strategy must be 1-3");
  if (attacker_fraction < 0.0 || attacker_fraction > 0.2 + 1e-12) {
    throw ConfigError("attacker fraction exceeds the 20% threat model");
  }
}

AttackConfig::Kind AttackConfig::kind_from_string(const std::string& name) {
  if (name == "none") return Kind::none;
  if (name == "gaussian") return Kind::gaussian;
  if (name == "label_flip") return Kind::label_flip;
  throw ConfigError("unknown attack: " + name);
}

std::string AttackConfig::kind_name() const {
  switch (kind) {
    case Kind::none: return "none";
    case Kind::gaussian: return "gaussian";
    case Kind::label_flip: return "label_flip";
  }
  return "?";
}

ParamWords poison_gaussian(const ParamWords& w, double sigma, DetRng& rng) {
  if (sigma < 0.0) throw std::domain_error("sigma must be >= 0");
  std::vector<double> v = w.to_doubles();
  if (sigma > 0.0) {
    for (auto& x : v) x += sigma * rng.normal();
  }
  return ParamWords::from_doubles(v, w.layout());
}

Dataset flip_labels(const Dataset& data, int src, int tgt) {
  if (src == tgt) throw ConfigError("flip source and target must differ");
  Dataset out = data;
  for (auto& y : out.labels) {
    if (y == src) y = tgt;
  }
  return out;
}

AttackerPlan attacker_behavior(int strategy, const ParamWords& honest,
                               const ParamWords& poisoned) {
  switch (strategy) {
    case 1:
      // Poisoned fragments both ways; submit the resulting mix.
      return AttackerPlan{poisoned, poisoned, false};
    case 2:
      // Poisoned fragments; the submission is the fully poisoned update under
      // the legitimately swapped seed.
      return AttackerPlan{poisoned, poisoned, true};
    case 3:
      // Poison the partner's mix, keep the own submission clean.
      return AttackerPlan{poisoned, honest, false};
    default:
      throw std::domain_error("strategy must be 1, 2 or 3");
  }
}

}  // namespace ffl
