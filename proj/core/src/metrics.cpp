#include "kwt/metrics.hpp"

#include <map>
#include <string>
#include <unordered_map>

#include "kwt/errors.hpp"

namespace kwt {

namespace {

void require_total(const Counts& counts) {
  if (counts.total() <= 0) throw ValidationError("metrics over zero outcomes");
}

double product_at(const Counts& counts, double alpha) {
  double total = static_cast<double>(counts.total());
  double ua = (alpha * static_cast<double>(counts.b) + static_cast<double>(counts.c)) / total;
  double ca = (static_cast<double>(counts.c) - alpha * static_cast<double>(counts.a)) / total;
  return ua * ca;
}

}  // namespace

Counts Counts::from_outcomes(const std::vector<OutcomeRecord>& outcomes) {
  Counts counts;
  for (const auto& outcome : outcomes) {
    switch (outcome.category) {
      case Category::A: ++counts.a; break;
      case Category::B: ++counts.b; break;
      case Category::C: ++counts.c; break;
      case Category::D: ++counts.d; break;
    }
  }
  return counts;
}

Rational ua_acc(const Counts& counts, const Rational& alpha) {
  require_total(counts);
  if (alpha < Rational(0, 1)) throw ValidationError("negative alpha");
  return (alpha * Rational::from_int(counts.b) + Rational::from_int(counts.c)) /
         Rational::from_int(counts.total());
}

Rational ca_acc(const Counts& counts, const Rational& alpha) {
  require_total(counts);
  if (alpha < Rational(0, 1)) throw ValidationError("negative alpha");
  return (Rational::from_int(counts.c) - alpha * Rational::from_int(counts.a)) /
         Rational::from_int(counts.total());
}

double naupc(const Counts& counts, double alpha_max, int k) {
  require_total(counts);
  if (k < 1) throw ValidationError("naupc grid size must be >= 1");
  if (alpha_max <= 0.0) throw ValidationError("alpha_max must be positive");

  // Trapezoid with the grid spacing factored out: the integral over
  // [0, alpha_max] divided by alpha_max equals (sum of endpoint-halved
  // samples)/k, so degenerate all-correct runs come out exactly 100.
  double weighted_sum = 0.0;
  for (int i = 0; i <= k; ++i) {
    double alpha = alpha_max * static_cast<double>(i) / static_cast<double>(k);
    double f = product_at(counts, alpha);
    weighted_sum += (i == 0 || i == k) ? 0.5 * f : f;
  }
  return 100.0 * weighted_sum / static_cast<double>(k);
}

Rational a_fpr(const Counts& counts) {
  require_total(counts);
  if (counts.a + counts.c == 0) {
    throw UndefinedMetricError("a_fpr undefined: no correct content (A+C == 0)");
  }
  return Rational(counts.a, counts.a + counts.c);
}

Rational idk_precision(const Counts& counts) {
  require_total(counts);
  if (counts.a + counts.b == 0) {
    throw UndefinedMetricError("idk_precision undefined: the model never abstained (A+B == 0)");
  }
  return Rational(counts.b, counts.a + counts.b);
}

Rational idk_recall(const Counts& counts) {
  require_total(counts);
  if (counts.b + counts.d == 0) {
    throw UndefinedMetricError("idk_recall undefined: no incorrect responses (B+D == 0)");
  }
  return Rational(counts.b, counts.b + counts.d);
}

Rational accuracy(const Counts& counts) {
  require_total(counts);
  return Rational(counts.a + counts.c, counts.total());
}

Rational idk_rate(const Counts& counts) {
  require_total(counts);
  return Rational(100 * (counts.a + counts.b), counts.total());
}

Rational idk_score_from_rates(const Rational& ir_answerable, const Rational& ir_unanswerable) {
  return (Rational::from_int(100) - ir_answerable + ir_unanswerable) / Rational::from_int(2);
}

Rational idk_score(const Counts& answerable, const Counts& unanswerable) {
  if (answerable.total() <= 0) throw ValidationError("idk_score: empty answerable split");
  if (unanswerable.total() <= 0) throw ValidationError("idk_score: empty unanswerable split");
  return idk_score_from_rates(idk_rate(answerable), idk_rate(unanswerable));
}

std::vector<CurvePoint> curve_points(const Counts& counts, double alpha_max, int k) {
  require_total(counts);
  if (k < 1) throw ValidationError("curve grid size must be >= 1");
  if (alpha_max <= 0.0) throw ValidationError("alpha_max must be positive");

  double total = static_cast<double>(counts.total());
  std::vector<CurvePoint> points;
  points.reserve(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) {
    double alpha = alpha_max * static_cast<double>(i) / static_cast<double>(k);
    CurvePoint point;
    point.alpha = alpha;
    point.ua_acc = (alpha * static_cast<double>(counts.b) + static_cast<double>(counts.c)) / total;
    point.ca_acc = (static_cast<double>(counts.c) - alpha * static_cast<double>(counts.a)) / total;
    points.push_back(point);
  }
  return points;
}

std::vector<ScoreBinFrequency> idk_vs_score_report(const std::vector<OutcomeRecord>& outcomes,
                                                   const std::vector<KnowledgeRecord>& records) {
  if (records.empty()) throw ValidationError("idk_vs_score_report: no knowledge records");
  int s = records.front().s;
  std::unordered_map<std::string, const KnowledgeRecord*> by_id;
  for (const auto& record : records) {
    if (record.s != s) {
      throw ValidationError("idk_vs_score_report: mixed s values (" + std::to_string(s) +
                            " and " + std::to_string(record.s) + ")");
    }
    by_id[record.instance_id] = &record;
  }

  // One bin per exact score value k/s, in increasing order.
  std::vector<ScoreBinFrequency> bins(static_cast<std::size_t>(s) + 1);
  for (int k = 0; k <= s; ++k) {
    bins[static_cast<std::size_t>(k)].score = Rational(k, s);
  }

  for (const auto& outcome : outcomes) {
    auto it = by_id.find(outcome.instance_id);
    if (it == by_id.end()) {
      throw ValidationError("idk_vs_score_report: no knowledge record for instance '" +
                            outcome.instance_id + "'");
    }
    std::size_t k = static_cast<std::size_t>(it->second->score.num() * s /
                                             it->second->score.den());
    auto& bin = bins[k];
    ++bin.total;
    if (outcome.has_idk) ++bin.with_idk;
  }

  for (auto& bin : bins) {
    bin.frequency = bin.total > 0
                        ? static_cast<double>(bin.with_idk) / static_cast<double>(bin.total)
                        : 0.0;
  }
  return bins;
}

}  // namespace kwt
