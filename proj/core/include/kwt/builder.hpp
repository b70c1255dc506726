#pragma once

#include <string>
#include <vector>

#include "kwt/rational.hpp"
#include "kwt/types.hpp"

namespace kwt {

// How to turn knowledge scores into a training file.
struct BuildConfig {
  WeightStrategy strategy = WeightStrategy::familiarity;
  IdkPlacement idk_placement = IdkPlacement::append;
  // Instances whose score is <= this threshold are treated as unknown. The
  // default of 0 abstains exactly on score-zero instances.
  Rational idk_threshold = Rational(0, 1);
  BaselineMode baseline_mode = BaselineMode::kwt;
  bool include_knowledge_field = false;

  void validate() const;
};

// Closed-form sample weight for a knowledge score k/s:
//   familiarity          (s*score + 1)/(s + 1)
//   reverse_familiarity  1 - s*score/(s + 1)
//   uniform              1
// computed in exact rational arithmetic.
Rational weight(const Rational& score, int s, WeightStrategy strategy);

// Renders a training target. Known instances (or placement none) pass gold
// through; unknown instances get the "<IDK>" literal appended, prepended
// (single-space separated), or substituted entirely (placement only).
std::string render_target(const std::string& gold, IdkPlacement placement, bool is_unknown);

// Builds one training example per instance (ft_top mode drops unknown
// instances instead). Every instance needs a knowledge record under a single
// matcher and a shared s. Output order equals input order.
std::vector<WeightedExample> build(const std::vector<QaInstance>& instances,
                                   const std::vector<KnowledgeRecord>& records,
                                   const BuildConfig& config);

// Reference weighted negative log-likelihood: with per-sample normalization
// (the default), L = -(1/N) * sum_i w_i * (1/M_i) * sum_t logp_{i,t}; with
// global-token normalization, L = -(sum_i w_i * sum_t logp_{i,t}) / sum_i M_i.
// Downstream trainers implement the same contract on real logits.
double weighted_nll(const std::vector<std::vector<double>>& token_logprobs,
                    const std::vector<Rational>& weights,
                    bool global_token_normalization = false);

}  // namespace kwt
