#include "kwt/report.hpp"

#include <fstream>

#include "kwt/errors.hpp"
#include "kwt/rng.hpp"
#include "kwt/version.hpp"

namespace kwt {

namespace {

nlohmann::json rational_json(const Rational& value, bool as_percent = false) {
  nlohmann::json j;
  j["defined"] = true;
  j["num"] = value.num();
  j["den"] = value.den();
  if (as_percent) {
    j["percent"] = value.to_double();
  } else {
    j["fraction"] = value.to_double();
    j["percent"] = (value * Rational::from_int(100)).to_double();
  }
  return j;
}

nlohmann::json undefined_json(const std::string& reason) {
  nlohmann::json j;
  j["defined"] = false;
  j["reason"] = reason;
  return j;
}

template <typename Fn>
nlohmann::json guarded_metric(Fn&& fn) {
  try {
    return rational_json(fn());
  } catch (const UndefinedMetricError& e) {
    return undefined_json(e.what());
  }
}

}  // namespace

std::string config_fingerprint(const nlohmann::json& config) {
  std::uint64_t h = fnv1a64(config.dump());
  return short_hex_tag(h >> 32) + short_hex_tag(h & 0xFFFFFFFFULL);
}

nlohmann::json make_header(std::uint64_t seed, const nlohmann::json& config) {
  nlohmann::json header;
  header["tool"] = kToolName;
  header["version"] = kToolVersion;
  header["seed"] = seed;
  header["config"] = config;
  header["fingerprint"] = config_fingerprint(config);
  return header;
}

nlohmann::json metrics_report_json(
    const Counts& counts, const std::optional<std::pair<Counts, Counts>>& split,
    const std::vector<ScoreBinFrequency>& idk_vs_score, const MetricsOptions& options) {
  nlohmann::json report;
  report["counts"] = {{"a", counts.a}, {"b", counts.b}, {"c", counts.c},
                      {"d", counts.d}, {"total", counts.total()}};

  nlohmann::json metrics;
  metrics["accuracy"] = rational_json(accuracy(counts));
  metrics["naupc"] = naupc(counts, options.alpha_max, options.grid_k);
  metrics["a_fpr"] = guarded_metric([&] { return a_fpr(counts); });
  metrics["idk_precision"] = guarded_metric([&] { return idk_precision(counts); });
  metrics["idk_recall"] = guarded_metric([&] { return idk_recall(counts); });
  metrics["idk_rate"] = rational_json(idk_rate(counts), true);
  report["metrics"] = std::move(metrics);

  nlohmann::json curve = nlohmann::json::array();
  for (const auto& point : curve_points(counts, options.alpha_max, options.report_curve_points)) {
    curve.push_back({{"alpha", point.alpha}, {"ua_acc", point.ua_acc}, {"ca_acc", point.ca_acc}});
  }
  report["curve"] = std::move(curve);
  report["integration"] = {{"alpha_max", options.alpha_max},
                           {"grid_k", options.grid_k},
                           {"unit", "product-curve area scaled to [0,100]"}};

  if (split.has_value()) {
    const auto& [ans, unans] = *split;
    nlohmann::json s;
    s["answerable"] = {{"a", ans.a}, {"b", ans.b}, {"c", ans.c}, {"d", ans.d},
                       {"total", ans.total()}};
    s["unanswerable"] = {{"a", unans.a}, {"b", unans.b}, {"c", unans.c}, {"d", unans.d},
                         {"total", unans.total()}};
    if (ans.total() > 0) s["ir_answerable"] = rational_json(idk_rate(ans), true);
    if (unans.total() > 0) s["ir_unanswerable"] = rational_json(idk_rate(unans), true);
    if (ans.total() > 0 && unans.total() > 0) {
      s["idk_score"] = rational_json(idk_score(ans, unans), true);
    }
    report["answerability"] = std::move(s);
  }

  if (!idk_vs_score.empty()) {
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& bin : idk_vs_score) {
      bins.push_back({{"score", bin.score.to_double()},
                      {"score_num", bin.score.num()},
                      {"score_den", bin.score.den()},
                      {"total", bin.total},
                      {"with_idk", bin.with_idk},
                      {"idk_frequency", bin.frequency}});
    }
    report["idk_vs_score"] = std::move(bins);
  }
  return report;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ValidationError("write failed for " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path + " for reading");
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace kwt
