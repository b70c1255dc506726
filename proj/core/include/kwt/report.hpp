#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kwt/metrics.hpp"
#include "kwt/types.hpp"

namespace kwt {

// Standard header carried by every output file: tool name and version, the
// run seed, the run's configuration, and a stable fingerprint of it. Headers
// never contain timestamps, absolute paths, or endpoint addresses, so reruns
// are byte-identical.
nlohmann::json make_header(std::uint64_t seed, const nlohmann::json& config);

// Hex fingerprint of a canonically serialized config object.
std::string config_fingerprint(const nlohmann::json& config);

struct MetricsOptions {
  double alpha_max = 1.0;
  int grid_k = 1000;
  // How many curve samples to embed in the report (the full grid is for
  // integration, not reading).
  int report_curve_points = 20;
};

// Full metric report over one outcome batch: counts, every metric (with a
// degeneracy flag instead of a value where the denominator is empty), curve
// samples, and optionally the answerable/unanswerable split and the
// knowledge-score/abstention profile.
nlohmann::json metrics_report_json(
    const Counts& counts, const std::optional<std::pair<Counts, Counts>>& split,
    const std::vector<ScoreBinFrequency>& idk_vs_score, const MetricsOptions& options);

// Writes a JSON document with 2-space indentation and a trailing newline.
void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace kwt
