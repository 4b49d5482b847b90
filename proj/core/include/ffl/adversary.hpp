#pragma once

#include <cstdint>
#include <string>

#include "ffl/params.hpp"
#include "ffl/rng.hpp"
#include "ffl/training.hpp"

namespace ffl {

struct AttackConfig {
  enum class Kind { none, gaussian, label_flip };

  Kind kind = Kind::none;
  double sigma = 0.5;        // gaussian
  int flip_src = 1;          // label_flip: src -> tgt
  int flip_tgt = 0;
  int strategy = 1;          // 1 | 2 | 3
  double attacker_fraction = 0.2;

  void validate() const;
  static Kind kind_from_string(const std::string& name);
  std::string kind_name() const;
};

// Adds N(0, sigma^2) to every parameter in the float domain.
ParamWords poison_gaussian(const ParamWords& w, double sigma, DetRng& rng);

// Relabels every src example as tgt; features untouched.
Dataset flip_labels(const Dataset& data, int src, int tgt);

// How a strategy maps the attacker's honest/poisoned updates onto the
// exchange. `exchange_update` feeds the fragments sent to the partner,
// `mix_basis` feeds the attacker's own mixed submission, and
// `submit_full_poison` replaces that submission with the poisoned update
// encrypted under the swapped seed (strategy 2).
struct AttackerPlan {
  ParamWords exchange_update;
  ParamWords mix_basis;
  bool submit_full_poison = false;
};

AttackerPlan attacker_behavior(int strategy, const ParamWords& honest,
                               const ParamWords& poisoned);

}  // namespace ffl
