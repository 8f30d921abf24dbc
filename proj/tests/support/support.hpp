#pragma once

#include <random>
#include <string>
#include <vector>

#include "xdrs/dataset.hpp"
#include "xdrs/drs.hpp"
#include "xdrs/evaluator.hpp"

namespace xdrs::testing {

using Rng = std::mt19937_64;

struct RandomDrsOptions {
  int max_boxes = 4;
  int max_conditions = 12;  // unary and binary, operators not counted
  int max_referents_per_box = 3;
  bool allow_relations = true;
  bool allow_constants = true;
};

// Always satisfies validate().
Drs random_drs(Rng& rng, const RandomDrsOptions& options = {});

// Consistent random renaming of every variable and box id, sorts kept.
Drs rename_symbols(const Drs& drs, Rng& rng);

// Drops, relabels or adds a few conditions; stays valid.
Drs perturb(const Drs& drs, Rng& rng);

// Exhaustive maximum over all sort-respecting injective partial maps.
int brute_force_matched(const ClauseSet& pred, const ClauseSet& gold);

// Minimum clause-string multiset over all sort-respecting renamings onto
// canonical names; equal normal forms means equal up to renaming.
std::vector<std::string> brute_force_normal_form(const ClauseSet& set);

// Ten hand-written English sentences with parses and gold DRSs.
std::vector<Example> synthetic_corpus();

// Random dependency tree over n tokens (CoNLL heads).
std::vector<int> random_heads(Rng& rng, int n);

std::string fixture_path(const std::string& name);

}  // namespace xdrs::testing
