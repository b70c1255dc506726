#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "kwt/errors.hpp"
#include "kwt/jsonl.hpp"
#include "kwt/klanalysis.hpp"
#include "kwt/rng.hpp"
#include "test_util.hpp"

using namespace kwt;
using testutil::TempDir;

namespace {

TokenDist make_dist(std::map<std::string, double> probs, double rest = 0.0) {
  TokenDist dist;
  dist.probs = std::move(probs);
  dist.rest_mass = rest;
  return dist;
}

DistDumpRecord make_record(const std::string& id, int position, TokenDist dist) {
  return DistDumpRecord{id, position, std::move(dist)};
}

TokenDistFrame make_frame(const std::string& id, int position, TokenDist base,
                          TokenDist trained) {
  return TokenDistFrame{id, position, std::move(base), std::move(trained)};
}

// Random distribution over a token subset plus a rest bucket, summing to 1.
TokenDist random_dist(SplitMix64& rng, int vocab) {
  TokenDist dist;
  std::vector<double> raw;
  double total = 0.0;
  for (int v = 0; v <= vocab; ++v) {
    double x = rng.next_double() + 1e-9;
    raw.push_back(x);
    total += x;
  }
  for (int v = 0; v < vocab; ++v) {
    dist.probs["tok" + std::to_string(v)] = raw[static_cast<std::size_t>(v)] / total;
  }
  dist.rest_mass = raw.back() / total;
  return dist;
}

}  // namespace

TEST_CASE("dump records round trip through JSON as natural logs") {
  auto record = make_record("q1", 1, make_dist({{"a", 0.5}, {"b", 0.25}}, 0.25));
  auto j = to_json(record);
  CHECK(j["logprobs"]["a"] == doctest::Approx(std::log(0.5)));
  CHECK(j["rest_mass"] == doctest::Approx(0.25));
  auto back = dist_dump_record_from_json(j);
  CHECK(back.instance_id == "q1");
  CHECK(back.position == 1);
  CHECK(back.dist.probs["a"] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(back.dist.probs["b"] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(back.dist.rest_mass == doctest::Approx(0.25));
}

TEST_CASE("dump files validate mass and uniqueness") {
  TempDir dir;
  auto path = dir.file("dump.jsonl");
  std::vector<nlohmann::json> lines{
      to_json(make_record("q1", 1, make_dist({{"a", 0.5}, {"b", 0.5}})))};
  write_jsonl(path, std::nullopt, lines);
  auto loaded = load_dist_dump(path);
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].dist.probs.size() == 2);

  lines.push_back(lines[0]);
  write_jsonl(path, std::nullopt, lines);
  CHECK_THROWS_AS(load_dist_dump(path), ValidationError);

  auto bad_mass = dir.file("bad.jsonl");
  auto record = to_json(make_record("q1", 1, make_dist({{"a", 0.5}}, 0.25)));
  write_jsonl(bad_mass, std::nullopt, {record});
  CHECK_THROWS_AS(load_dist_dump(bad_mass), ValidationError);

  auto empty = dir.file("empty.jsonl");
  testutil::write_file(empty, "");
  CHECK_THROWS_AS(load_dist_dump(empty), ValidationError);
}

TEST_CASE("align_dumps joins on (instance, position)") {
  std::vector<DistDumpRecord> base{make_record("q1", 1, make_dist({{"a", 1.0}})),
                                   make_record("q1", 2, make_dist({{"b", 1.0}}))};
  std::vector<DistDumpRecord> trained{make_record("q1", 2, make_dist({{"b", 1.0}})),
                                      make_record("q1", 1, make_dist({{"a", 1.0}}))};
  auto frames = align_dumps(base, trained);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].position == 1);
  CHECK(frames[1].position == 2);
  CHECK(frames[0].base.probs.count("a") == 1);
  CHECK(frames[0].trained.probs.count("a") == 1);
}

TEST_CASE("align_dumps rejects mismatched key sets and gaps") {
  std::vector<DistDumpRecord> base{make_record("q1", 1, make_dist({{"a", 1.0}}))};
  std::vector<DistDumpRecord> extra{make_record("q1", 1, make_dist({{"a", 1.0}})),
                                    make_record("q2", 1, make_dist({{"a", 1.0}}))};
  CHECK_THROWS_AS(align_dumps(base, extra), ValidationError);

  std::vector<DistDumpRecord> gapped{make_record("q1", 1, make_dist({{"a", 1.0}})),
                                     make_record("q1", 3, make_dist({{"a", 1.0}}))};
  CHECK_THROWS_AS(align_dumps(gapped, gapped), ValidationError);
}

TEST_CASE("identical distributions have exactly zero divergence") {
  auto dist = make_dist({{"a", 0.4}, {"b", 0.35}}, 0.25);
  std::vector<TokenDistFrame> frames{make_frame("q1", 1, dist, dist),
                                     make_frame("q1", 2, dist, dist)};
  CHECK(kl_per_pair(frames) == 0.0);
}

TEST_CASE("two-token hand example") {
  auto base = make_dist({{"yes", 0.5}, {"no", 0.5}});
  auto trained = make_dist({{"yes", 0.25}, {"no", 0.75}});
  std::vector<TokenDistFrame> frames{make_frame("q1", 1, base, trained)};
  double expected = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(kl_per_pair(frames) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(kl_per_pair(frames) == doctest::Approx(0.14384).epsilon(1e-4));
  CHECK(std::abs(kl_per_pair(frames) - 0.14384) < 1e-5);
}

TEST_CASE("per-position values average over the instance") {
  auto b1 = make_dist({{"yes", 0.5}, {"no", 0.5}});
  auto t1 = make_dist({{"yes", 0.25}, {"no", 0.75}});
  auto same = make_dist({{"x", 1.0}});
  std::vector<TokenDistFrame> frames{make_frame("q1", 1, b1, t1),
                                     make_frame("q1", 2, same, same)};
  double single = kl_per_pair({make_frame("q1", 1, b1, t1)});
  CHECK(kl_per_pair(frames) == doctest::Approx(single / 2.0).epsilon(1e-12));
}

TEST_CASE("tokens missing from one side fold into its rest bucket") {
  // base explicit {a: .6, b: .4}; trained explicit {a: .6, c: .4}.
  // Common singleton: a. base rest' = .4, trained rest' = .4 -> KL 0 for the
  // lumped pair, plus the a-vs-a term (also 0).
  auto base = make_dist({{"a", 0.6}, {"b", 0.4}});
  auto trained = make_dist({{"a", 0.6}, {"c", 0.4}});
  CHECK(kl_per_pair({make_frame("q1", 1, base, trained)}) == doctest::Approx(0.0));
}

TEST_CASE("unmatched base mass with an empty trained tail is infinite") {
  auto same = make_dist({{"x", 1.0}});
  auto base = make_dist({{"a", 0.5}, {"b", 0.5}});
  auto trained = make_dist({{"a", 1.0}});
  try {
    kl_per_pair({make_frame("q7", 1, same, same), make_frame("q7", 2, base, trained)});
    FAIL("expected InfiniteDivergenceError");
  } catch (const InfiniteDivergenceError& e) {
    std::string msg = e.what();
    CHECK(msg.find("q7") != std::string::npos);
    CHECK(msg.find("2") != std::string::npos);
  }
}

TEST_CASE("zero-probability base tokens contribute nothing") {
  auto base = make_dist({{"a", 1.0}, {"b", 0.0}});
  auto trained = make_dist({{"a", 1.0}});
  CHECK(kl_per_pair({make_frame("q1", 1, base, trained)}) == doctest::Approx(0.0));
}

TEST_CASE("divergence is nonnegative across random frames") {
  SplitMix64 rng(777);
  for (int trial = 0; trial < 1000; ++trial) {
    int vocab = 1 + static_cast<int>(rng.next_below(6));
    auto frame = make_frame("r", 1, random_dist(rng, vocab), random_dist(rng, vocab));
    double kl = kl_per_pair({frame});
    CAPTURE(trial);
    CHECK(kl >= -1e-12);
    CHECK(std::isfinite(kl));
  }
}

TEST_CASE("kl_per_pair rejects multi-instance input and empty input") {
  auto dist = make_dist({{"a", 1.0}});
  std::vector<TokenDistFrame> mixed{make_frame("q1", 1, dist, dist),
                                    make_frame("q2", 1, dist, dist)};
  CHECK_THROWS_AS(kl_per_pair(mixed), ValidationError);
  CHECK_THROWS_AS(kl_per_pair({}), ValidationError);
}

TEST_CASE("kl_report averages instances without weighting by length") {
  auto b1 = make_dist({{"yes", 0.5}, {"no", 0.5}});
  auto t1 = make_dist({{"yes", 0.25}, {"no", 0.75}});
  auto same = make_dist({{"x", 1.0}});
  // q1: one diverging position; q2: two identical positions.
  std::vector<TokenDistFrame> frames{make_frame("q1", 1, b1, t1),
                                     make_frame("q2", 1, same, same),
                                     make_frame("q2", 2, same, same)};
  auto report = kl_report(frames);
  REQUIRE(report.per_instance.size() == 2);
  double q1 = kl_per_pair({make_frame("q1", 1, b1, t1)});
  CHECK(report.per_instance[0].first == "q1");
  CHECK(report.per_instance[0].second == doctest::Approx(q1));
  CHECK(report.per_instance[1].second == doctest::Approx(0.0));
  CHECK(report.mean_nats == doctest::Approx(q1 / 2.0));
}

TEST_CASE("idk position profile bins by relative position") {
  // Instance with T=4: positions land in bins ceil(4*t/4)-1 = t-1 of 4 bins.
  std::vector<DistDumpRecord> dump{
      make_record("q1", 1, make_dist({{"<IDK>", 0.1}, {"x", 0.9}})),
      make_record("q1", 2, make_dist({{"<IDK>", 0.2}, {"x", 0.8}})),
      make_record("q1", 3, make_dist({{"x", 1.0}})),
      make_record("q1", 4, make_dist({{"<IDK>", 0.4}, {"x", 0.6}}))};
  auto profile = idk_position_profile(dump, "<IDK>", 4);
  REQUIRE(profile.size() == 4);
  CHECK(profile[0].low == doctest::Approx(0.0));
  CHECK(profile[0].high == doctest::Approx(0.25));
  CHECK(profile[0].positions == 1);
  CHECK(profile[0].mean_probability == doctest::Approx(0.1));
  CHECK(profile[1].mean_probability == doctest::Approx(0.2));
  // Absent from explicit support counts as zero.
  CHECK(profile[2].mean_probability == doctest::Approx(0.0));
  CHECK(profile[3].mean_probability == doctest::Approx(0.4));
}

TEST_CASE("profile pools positions from instances of different lengths") {
  // T=1: its only position has rel 1.0 -> last bin.
  // T=2: rels 0.5 and 1.0 -> bins 0 and 1 of 2.
  std::vector<DistDumpRecord> dump{
      make_record("short", 1, make_dist({{"<IDK>", 0.3}, {"x", 0.7}})),
      make_record("long", 1, make_dist({{"<IDK>", 0.1}, {"x", 0.9}})),
      make_record("long", 2, make_dist({{"<IDK>", 0.5}, {"x", 0.5}}))};
  auto profile = idk_position_profile(dump, "<IDK>", 2);
  REQUIRE(profile.size() == 2);
  CHECK(profile[0].positions == 1);
  CHECK(profile[0].mean_probability == doctest::Approx(0.1));
  CHECK(profile[1].positions == 2);
  CHECK(profile[1].mean_probability == doctest::Approx((0.3 + 0.5) / 2.0));
}

TEST_CASE("profile validates bin count and contiguity") {
  std::vector<DistDumpRecord> dump{make_record("q1", 1, make_dist({{"x", 1.0}}))};
  CHECK_THROWS_AS(idk_position_profile(dump, "<IDK>", 0), ValidationError);
  std::vector<DistDumpRecord> gapped{make_record("q1", 2, make_dist({{"x", 1.0}}))};
  CHECK_THROWS_AS(idk_position_profile(gapped, "<IDK>", 2), ValidationError);
}
