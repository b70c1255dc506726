#include "kwt/klanalysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kwt/errors.hpp"
#include "kwt/jsonl.hpp"

namespace kwt {

namespace {

constexpr double kSumTolerance = 1e-6;

void validate_dist(const TokenDist& dist, const std::string& context) {
  double sum = dist.rest_mass;
  if (dist.rest_mass < 0.0) throw ValidationError(context + ": negative rest_mass");
  for (const auto& [token, p] : dist.probs) {
    if (p < 0.0) throw ValidationError(context + ": negative probability for token '" + token + "'");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw ValidationError(context + ": probabilities sum to " + std::to_string(sum) +
                          ", not 1 within 1e-6");
  }
}

// Groups aligned frames by instance, validating position contiguity 1..T.
std::map<std::string, std::vector<const TokenDistFrame*>> group_by_instance(
    const std::vector<TokenDistFrame>& frames) {
  std::map<std::string, std::vector<const TokenDistFrame*>> groups;
  for (const auto& frame : frames) groups[frame.instance_id].push_back(&frame);
  for (auto& [id, group] : groups) {
    std::sort(group.begin(), group.end(),
              [](const TokenDistFrame* a, const TokenDistFrame* b) {
                return a->position < b->position;
              });
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (group[i]->position != static_cast<int>(i) + 1) {
        throw ValidationError("instance '" + id + "' has non-contiguous positions (expected " +
                              std::to_string(i + 1) + ", found " +
                              std::to_string(group[i]->position) + ")");
      }
    }
  }
  return groups;
}

double frame_kl(const TokenDistFrame& frame) {
  // Singleton events: tokens with positive explicit probability on both
  // sides. All remaining mass on each side forms that side's rest bucket.
  double kl = 0.0;
  double base_rest = frame.base.rest_mass;
  double trained_rest = frame.trained.rest_mass;
  for (const auto& [token, p] : frame.trained.probs) {
    auto it = frame.base.probs.find(token);
    bool shared = p > 0.0 && it != frame.base.probs.end() && it->second > 0.0;
    if (!shared) trained_rest += p;
  }
  for (const auto& [token, p_base] : frame.base.probs) {
    if (p_base <= 0.0) continue;
    auto it = frame.trained.probs.find(token);
    if (it == frame.trained.probs.end() || it->second <= 0.0) {
      base_rest += p_base;
      continue;
    }
    kl += p_base * std::log(p_base / it->second);
  }
  if (base_rest > 0.0) {
    if (trained_rest <= 0.0) {
      throw InfiniteDivergenceError(frame.instance_id, static_cast<std::size_t>(frame.position),
                                    "<rest>");
    }
    kl += base_rest * std::log(base_rest / trained_rest);
  }
  return kl;
}

}  // namespace

std::vector<DistDumpRecord> load_dist_dump(const std::string& path) {
  auto records = read_jsonl_records(path);
  if (records.empty()) throw ValidationError(path + ": empty dump file");
  std::vector<DistDumpRecord> out;
  out.reserve(records.size());
  std::set<std::pair<std::string, int>> seen;
  for (const auto& j : records) {
    DistDumpRecord record = dist_dump_record_from_json(j);
    validate_dist(record.dist, path + ": instance '" + record.instance_id + "' position " +
                                   std::to_string(record.position));
    if (!seen.insert({record.instance_id, record.position}).second) {
      throw ValidationError(path + ": duplicate frame for instance '" + record.instance_id +
                            "' position " + std::to_string(record.position));
    }
    out.push_back(std::move(record));
  }
  return out;
}

nlohmann::json to_json(const DistDumpRecord& record) {
  nlohmann::json logprobs = nlohmann::json::object();
  for (const auto& [token, p] : record.dist.probs) logprobs[token] = std::log(p);
  nlohmann::json j;
  j["instance_id"] = record.instance_id;
  j["position"] = record.position;
  j["logprobs"] = std::move(logprobs);
  j["rest_mass"] = record.dist.rest_mass;
  return j;
}

DistDumpRecord dist_dump_record_from_json(const nlohmann::json& j) {
  const std::string ctx = "TokenDistFrame";
  DistDumpRecord record;
  const auto& id = require_field(j, "instance_id", ctx);
  if (!id.is_string()) throw ParseError(ctx + ": field 'instance_id' must be a string");
  record.instance_id = id.get<std::string>();
  const auto& position = require_field(j, "position", ctx);
  if (!position.is_number_integer()) throw ParseError(ctx + ": field 'position' must be an integer");
  record.position = position.get<int>();
  if (record.position < 1) throw ValidationError(ctx + ": position must be >= 1");
  const auto& logprobs = require_field(j, "logprobs", ctx);
  if (!logprobs.is_object()) throw ParseError(ctx + ": field 'logprobs' must be an object");
  for (const auto& [token, lp] : logprobs.items()) {
    if (!lp.is_number()) throw ParseError(ctx + ": logprob of token '" + token + "' must be a number");
    record.dist.probs[token] = std::exp(lp.get<double>());
  }
  const auto& rest = require_field(j, "rest_mass", ctx);
  if (!rest.is_number()) throw ParseError(ctx + ": field 'rest_mass' must be a number");
  record.dist.rest_mass = rest.get<double>();
  return record;
}

std::vector<TokenDistFrame> align_dumps(const std::vector<DistDumpRecord>& base,
                                        const std::vector<DistDumpRecord>& trained) {
  std::map<std::pair<std::string, int>, const DistDumpRecord*> trained_by_key;
  for (const auto& record : trained) {
    trained_by_key[{record.instance_id, record.position}] = &record;
  }
  if (trained_by_key.size() != base.size()) {
    throw ValidationError("dump files disagree in frame count: base " +
                          std::to_string(base.size()) + ", trained " +
                          std::to_string(trained_by_key.size()));
  }

  std::vector<TokenDistFrame> frames;
  frames.reserve(base.size());
  for (const auto& record : base) {
    auto it = trained_by_key.find({record.instance_id, record.position});
    if (it == trained_by_key.end()) {
      throw ValidationError("trained dump lacks instance '" + record.instance_id +
                            "' position " + std::to_string(record.position));
    }
    TokenDistFrame frame;
    frame.instance_id = record.instance_id;
    frame.position = record.position;
    frame.base = record.dist;
    frame.trained = it->second->dist;
    frames.push_back(std::move(frame));
  }
  group_by_instance(frames);
  return frames;
}

double kl_per_pair(const std::vector<TokenDistFrame>& instance_frames) {
  if (instance_frames.empty()) throw ValidationError("kl_per_pair over no frames");
  auto groups = group_by_instance(instance_frames);
  if (groups.size() != 1) {
    throw ValidationError("kl_per_pair expects frames of a single instance, got " +
                          std::to_string(groups.size()));
  }
  const auto& group = groups.begin()->second;
  double sum = 0.0;
  for (const TokenDistFrame* frame : group) sum += frame_kl(*frame);
  return sum / static_cast<double>(group.size());
}

KlReport kl_report(const std::vector<TokenDistFrame>& frames) {
  if (frames.empty()) throw ValidationError("kl_report over no frames");
  auto groups = group_by_instance(frames);

  KlReport report;
  report.per_instance.reserve(groups.size());
  double sum = 0.0;
  for (const auto& [id, group] : groups) {
    double inst_sum = 0.0;
    for (const TokenDistFrame* frame : group) inst_sum += frame_kl(*frame);
    double kl = inst_sum / static_cast<double>(group.size());
    report.per_instance.emplace_back(id, kl);
    sum += kl;
  }
  report.mean_nats = sum / static_cast<double>(groups.size());
  return report;
}

std::vector<PositionBin> idk_position_profile(const std::vector<DistDumpRecord>& dump,
                                              const std::string& idk_token, int n_bins) {
  if (dump.empty()) throw ValidationError("idk_position_profile over no frames");
  if (n_bins < 1) throw ValidationError("idk_position_profile: n_bins must be >= 1");

  // Per-instance lengths T, validated contiguous 1..T.
  std::map<std::string, std::vector<const DistDumpRecord*>> groups;
  for (const auto& record : dump) groups[record.instance_id].push_back(&record);
  std::vector<PositionBin> bins(static_cast<std::size_t>(n_bins));
  for (int i = 0; i < n_bins; ++i) {
    bins[static_cast<std::size_t>(i)].low = static_cast<double>(i) / n_bins;
    bins[static_cast<std::size_t>(i)].high = static_cast<double>(i + 1) / n_bins;
  }

  std::vector<double> sums(static_cast<std::size_t>(n_bins), 0.0);
  for (auto& [id, group] : groups) {
    std::sort(group.begin(), group.end(),
              [](const DistDumpRecord* a, const DistDumpRecord* b) {
                return a->position < b->position;
              });
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (group[i]->position != static_cast<int>(i) + 1) {
        throw ValidationError("instance '" + id + "' has non-contiguous positions");
      }
    }
    const double t_count = static_cast<double>(group.size());
    for (const DistDumpRecord* record : group) {
      // rel in (0,1]; ceil(rel*n)-1 maps position t of T=n_bins to bin t-1.
      double rel = static_cast<double>(record->position) / t_count;
      int bin = static_cast<int>(std::ceil(rel * n_bins)) - 1;
      bin = std::clamp(bin, 0, n_bins - 1);
      auto it = record->dist.probs.find(idk_token);
      double p = it != record->dist.probs.end() ? it->second : 0.0;
      sums[static_cast<std::size_t>(bin)] += p;
      ++bins[static_cast<std::size_t>(bin)].positions;
    }
  }

  for (int i = 0; i < n_bins; ++i) {
    auto& bin = bins[static_cast<std::size_t>(i)];
    bin.mean_probability =
        bin.positions > 0 ? sums[static_cast<std::size_t>(i)] / static_cast<double>(bin.positions)
                          : 0.0;
  }
  return bins;
}

}  // namespace kwt
