#pragma once

#include <map>
#include <string>
#include <vector>

#include "kwt/types.hpp"

namespace kwt {

// One model's next-token distribution at one teacher-forced position:
// explicit probabilities for the dumped tokens plus a lumped rest_mass
// covering the remainder of the vocabulary. Explicit mass + rest == 1.
struct TokenDist {
  std::map<std::string, double> probs;
  double rest_mass = 0.0;

  bool operator==(const TokenDist&) const = default;
};

// One line of a per-model logprob dump. Positions are 1-based indices into
// the gold target tokens.
struct DistDumpRecord {
  std::string instance_id;
  int position = 0;
  TokenDist dist;

  bool operator==(const DistDumpRecord&) const = default;
};

// Base and trained distributions joined at one position.
struct TokenDistFrame {
  std::string instance_id;
  int position = 0;
  TokenDist base;
  TokenDist trained;

  bool operator==(const TokenDistFrame&) const = default;
};

// Loads a dump file. On disk probabilities are stored as natural-log values
// for dynamic range ("logprobs" map, "rest_mass" linear); they are converted
// to linear probabilities here and validated to sum to 1 within 1e-6.
std::vector<DistDumpRecord> load_dist_dump(const std::string& path);

nlohmann::json to_json(const DistDumpRecord& record);
DistDumpRecord dist_dump_record_from_json(const nlohmann::json& j);

// Joins two per-model dumps on (instance_id, position). The key sets must
// match exactly and every instance's positions must be contiguous from 1.
std::vector<TokenDistFrame> align_dumps(const std::vector<DistDumpRecord>& base,
                                        const std::vector<DistDumpRecord>& trained);

// Mean per-position KL(base || trained) in nats for one instance's frames.
// Tokens explicit with positive probability on both sides are compared
// directly; everything else (each side's tail and tokens the other side
// lacks) is folded into one lumped rest bucket per side, so the result is a
// true KL between coarsened distributions and is always >= 0. A base-side
// rest bucket with no trained-side counterpart raises
// InfiniteDivergenceError.
double kl_per_pair(const std::vector<TokenDistFrame>& instance_frames);

// Unweighted mean over instances plus the per-instance breakdown.
struct KlReport {
  double mean_nats = 0.0;
  std::vector<std::pair<std::string, double>> per_instance;
};
KlReport kl_report(const std::vector<TokenDistFrame>& frames);

// Mean explicit probability of idk_token per relative-position bin. Position
// t of an instance with T positions lands in the bin covering t/T; a token
// absent from the explicit support counts as probability 0, never rest_mass.
struct PositionBin {
  double low = 0.0;
  double high = 0.0;
  std::size_t positions = 0;
  double mean_probability = 0.0;
};
std::vector<PositionBin> idk_position_profile(const std::vector<DistDumpRecord>& dump,
                                              const std::string& idk_token, int n_bins);

}  // namespace kwt
