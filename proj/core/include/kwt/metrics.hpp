#pragma once

#include <cstdint>
#include <vector>

#include "kwt/rational.hpp"
#include "kwt/types.hpp"

namespace kwt {

// Outcome-category counts: a = abstained though correct, b = abstained and
// incorrect, c = answered correctly, d = answered incorrectly.
struct Counts {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;
  std::int64_t d = 0;

  std::int64_t total() const { return a + b + c + d; }
  Counts operator+(const Counts& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
  bool operator==(const Counts&) const = default;

  static Counts from_outcomes(const std::vector<OutcomeRecord>& outcomes);
};

// All count-ratio metrics are exact rationals; percent scaling happens at
// rendering. Undefined denominators raise UndefinedMetricError so degenerate
// runs are flagged instead of silently scored.

// Uncertainty-aware accuracy (alpha*B + C)/total: partial credit alpha for
// abstaining on an incorrect answer.
Rational ua_acc(const Counts& counts, const Rational& alpha);

// Certainty-aware accuracy (C - alpha*A)/total: penalty alpha for abstaining
// on a correct answer. May be negative.
Rational ca_acc(const Counts& counts, const Rational& alpha);

// Normalized area under the ua*ca product curve over alpha in [0, alpha_max],
// trapezoidal on k+1 uniform grid points, scaled so a perfect run scores 100.
double naupc(const Counts& counts, double alpha_max = 1.0, int k = 1000);

// Fraction of correct answers needlessly marked uncertain: A/(A+C).
Rational a_fpr(const Counts& counts);

// Fraction of abstentions that were justified: B/(A+B).
Rational idk_precision(const Counts& counts);

// Fraction of incorrect responses that abstained: B/(B+D).
Rational idk_recall(const Counts& counts);

// Plain answer accuracy (A+C)/total, abstention ignored.
Rational accuracy(const Counts& counts);

// Abstention rate in percent: 100*(A+B)/total.
Rational idk_rate(const Counts& counts);

// Composite of the abstention rates on answerable and unanswerable splits,
// in percent: ((100 - IR_ans) + IR_unans)/2.
Rational idk_score(const Counts& answerable, const Counts& unanswerable);
Rational idk_score_from_rates(const Rational& ir_answerable, const Rational& ir_unanswerable);

// One sampled operating point of the abstention-reward curve.
struct CurvePoint {
  double alpha = 0.0;
  double ua_acc = 0.0;
  double ca_acc = 0.0;
};

// The k+1 uniformly spaced curve points naupc integrates.
std::vector<CurvePoint> curve_points(const Counts& counts, double alpha_max = 1.0, int k = 1000);

// Abstention frequency grouped by knowledge-score bin.
struct ScoreBinFrequency {
  Rational score;
  std::size_t total = 0;
  std::size_t with_idk = 0;
  double frequency = 0.0;
};

// Joins outcomes with knowledge records by instance id and reports, for each
// exact score value k/s, the fraction of that bin's responses that abstained.
// Every outcome must have a record; records must share one s.
std::vector<ScoreBinFrequency> idk_vs_score_report(const std::vector<OutcomeRecord>& outcomes,
                                                   const std::vector<KnowledgeRecord>& records);

}  // namespace kwt
