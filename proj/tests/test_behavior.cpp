#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "rlclarity/behavior.hpp"
#include "rlclarity/rng.hpp"

using namespace rlclarity;

namespace {

std::vector<std::string> labels(std::initializer_list<const char*> items) {
  return {items.begin(), items.end()};
}

std::vector<std::vector<std::size_t>> members_of(const ClusterSet& set) {
  std::vector<std::vector<std::size_t>> out;
  for (const Cluster& c : set.clusters) out.push_back(c.members);
  return out;
}

// Ground-truth partition by label identity, in first-appearance order.
std::vector<std::vector<std::size_t>> label_partition(
    const std::vector<std::string>& seq) {
  std::vector<std::string> seen;
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    std::size_t k = 0;
    while (k < seen.size() && seen[k] != seq[i]) ++k;
    if (k == seen.size()) {
      seen.push_back(seq[i]);
      out.emplace_back();
    }
    out[k].push_back(i);
  }
  return out;
}

// Hand-trace of the incremental comparison count: each solution is checked
// against representatives in creation order until its own cluster matches.
std::size_t trace_judge_calls(const std::vector<std::string>& seq) {
  std::vector<std::string> reps;
  std::size_t calls = 0;
  for (const std::string& s : seq) {
    bool placed = false;
    for (const std::string& rep : reps) {
      ++calls;
      if (rep == s) {
        placed = true;
        break;
      }
    }
    if (!placed) reps.push_back(s);
  }
  return calls;
}

// Local HTTP judge fixture: decides same-method by string equality and
// counts how often the wire is actually hit (cache hits never reach it).
class JudgeServer {
 public:
  JudgeServer() {
    server_.Post("/judge", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      ++hits_;
      const auto body = nlohmann::json::parse(req.body);
      last_question_ = body.at("question").get<std::string>();
      const nlohmann::json reply = {
          {"is_same_method", body.at("solution_a") == body.at("solution_b")},
          {"reason", "string identity"}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/broken", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("{\"reason\":\"no verdict field\"}", "application/json");
    });
    server_.Post("/error", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~JudgeServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint(const std::string& path = "/judge") const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  int hits() const { return hits_.load(); }
  std::string last_question() const { return last_question_; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::string last_question_;
};

}  // namespace

TEST_CASE("cluster_solutions reproduces the worked label examples") {
  LabelEqualityJudge judge;

  const ClusterSet abc = cluster_solutions(labels({"A", "A", "B", "A", "C"}), judge);
  CHECK(members_of(abc) ==
        std::vector<std::vector<std::size_t>>{{0, 1, 3}, {2}, {4}});
  CHECK(abc.clusters[0].representative == 0);
  CHECK(abc.clusters[1].representative == 2);
  CHECK(abc.clusters[2].representative == 4);

  const ClusterSet single = cluster_solutions(labels({"A"}), judge);
  CHECK(members_of(single) == std::vector<std::vector<std::size_t>>{{0}});
  CHECK(single.judge_calls == 0);

  const ClusterSet empty = cluster_solutions(std::vector<std::string>{}, judge);
  CHECK(empty.clusters.empty());
  CHECK(empty.judge_calls == 0);
  CHECK(empty.total_members() == 0);
}

TEST_CASE("the alternating sequence costs exactly four comparisons") {
  LabelEqualityJudge judge;
  const ClusterSet set = cluster_solutions(labels({"A", "B", "A", "B"}), judge);
  CHECK(members_of(set) == std::vector<std::vector<std::size_t>>{{0, 2}, {1, 3}});
  // Trace: (1 vs rep0), (2 vs rep0), (3 vs rep0), (3 vs rep1).
  CHECK(set.judge_calls == 4);
}

TEST_CASE("clustering matches the ground-truth partition on random labels") {
  LabelEqualityJudge judge;
  for (std::uint32_t t = 0; t < 300; ++t) {
    const std::size_t n =
        1 + static_cast<std::size_t>(rng::u01(23, t, 0, 0, 910) * 63.0);
    const std::size_t alpha =
        1 + static_cast<std::size_t>(rng::u01(23, t, 1, 0, 910) * 7.0);
    std::vector<std::string> seq(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto pick = static_cast<char>(
          'A' + static_cast<std::size_t>(
                    rng::u01(23, t, static_cast<std::uint32_t>(i + 2), 0, 910) *
                    static_cast<double>(alpha)));
      seq[i] = std::string(1, pick);
    }
    const ClusterSet set = cluster_solutions(seq, judge);
    CHECK(members_of(set) == label_partition(seq));
    CHECK(set.judge_calls == trace_judge_calls(seq));
    CHECK(set.total_members() == n);
    const auto ratio = distinct_ratio(set, n);
    REQUIRE(ratio.has_value());
    CHECK(*ratio == static_cast<double>(set.clusters.size()) /
                        static_cast<double>(n));
    CHECK(*ratio > 0.0);
    CHECK(*ratio <= 1.0);
  }
}

TEST_CASE("distinct_ratio on the worked examples") {
  LabelEqualityJudge judge;
  const ClusterSet set =
      cluster_solutions(labels({"A", "B", "C", "A", "B"}), judge);
  CHECK(*distinct_ratio(set, 5) == doctest::Approx(0.6));

  const ClusterSet one = cluster_solutions(labels({"A"}), judge);
  CHECK(*distinct_ratio(one, 1) == 1.0);

  const ClusterSet none = cluster_solutions(std::vector<std::string>{}, judge);
  CHECK_FALSE(distinct_ratio(none, 0).has_value());

  try {
    distinct_ratio(set, 4);
    FAIL("expected CountMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == errc::count_mismatch);
  }
}

TEST_CASE("callback judge receives the question context") {
  std::string seen_question;
  CallbackJudge judge([&](const std::string& question, const std::string& a,
                          const std::string& b) {
    seen_question = question;
    return a.size() == b.size();
  });
  judge.set_question("which method?");
  const ClusterSet set = cluster_solutions(labels({"xx", "yy", "z"}), judge);
  CHECK(set.clusters.size() == 2);
  CHECK(members_of(set) == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
  CHECK(seen_question == "which method?");
}

TEST_CASE("judge cache is symmetric in the pair order") {
  JudgeCache cache;
  CHECK_FALSE(cache.lookup("a", "b").has_value());
  cache.store("a", "b", true);
  CHECK(cache.size() == 1);
  REQUIRE(cache.lookup("b", "a").has_value());
  CHECK(*cache.lookup("b", "a"));
  cache.store("b", "a", true);
  CHECK(cache.size() == 1);
  cache.store("a", "c", false);
  CHECK(cache.size() == 2);
  CHECK_FALSE(*cache.lookup("c", "a"));
}

TEST_CASE("attribution_summary counts severities and S<0 fractions") {
  const std::vector<AttributionRecord> records = {
      {"E2.1", -0.2}, {"E3.1", 0.3}, {"E2.2", -0.5}};
  const AttributionSummary summary = attribution_summary(records);
  CHECK(summary.total == 3);
  CHECK(summary.counts[static_cast<std::size_t>(Severity::High)] == 2);
  CHECK(summary.counts[static_cast<std::size_t>(Severity::Mid)] == 1);
  CHECK(summary.counts[static_cast<std::size_t>(Severity::Low)] == 0);
  CHECK(*summary.proportions[static_cast<std::size_t>(Severity::High)] ==
        doctest::Approx(2.0 / 3.0));
  CHECK(*summary.proportions[static_cast<std::size_t>(Severity::Mid)] ==
        doctest::Approx(1.0 / 3.0));
  CHECK(*summary.s_neg_fraction[static_cast<std::size_t>(Severity::High)] ==
        1.0);
  CHECK(*summary.s_neg_fraction[static_cast<std::size_t>(Severity::Mid)] ==
        0.0);
  CHECK_FALSE(
      summary.s_neg_fraction[static_cast<std::size_t>(Severity::Low)]
          .has_value());
}

TEST_CASE("attribution_summary handles empty input and missing S values") {
  const AttributionSummary empty = attribution_summary({});
  CHECK(empty.total == 0);
  for (std::size_t i = 0; i < kSeverityCount; ++i) {
    CHECK(empty.counts[i] == 0);
    CHECK_FALSE(empty.proportions[i].has_value());
    CHECK_FALSE(empty.s_neg_fraction[i].has_value());
  }

  // Records lacking S count toward proportions but not the S<0 fraction.
  const std::vector<AttributionRecord> records = {{"E1.1", std::nullopt},
                                                  {"E1.2", -0.1}};
  const AttributionSummary partial = attribution_summary(records);
  const auto high = static_cast<std::size_t>(Severity::High);
  CHECK(partial.counts[high] == 2);
  CHECK(*partial.proportions[high] == 1.0);
  CHECK(*partial.s_neg_fraction[high] == 1.0);  // one defined, one negative

  try {
    attribution_summary(std::vector<AttributionRecord>{{"E9.9", 0.1}});
    FAIL("expected UnknownCode");
  } catch (const Error& e) {
    CHECK(e.code() == errc::unknown_code);
  }
}

TEST_CASE("stability_by_clarity splits on S >= 0") {
  const std::vector<StabilityEntry> entries = {{0.2, 0.5}, {0.9, -0.4}};
  const StabilitySummary summary = stability_by_clarity(entries);
  CHECK(summary.n_high == 1);
  CHECK(*summary.mean_ratio_high == doctest::Approx(0.2));
  CHECK(summary.n_low == 1);
  CHECK(*summary.mean_ratio_low == doctest::Approx(0.9));

  const StabilitySummary all_high =
      stability_by_clarity(std::vector<StabilityEntry>{{0.5, 0.1}, {0.7, 0.2}});
  CHECK(all_high.n_low == 0);
  CHECK_FALSE(all_high.mean_ratio_low.has_value());
  CHECK(*all_high.mean_ratio_high == doctest::Approx(0.6));

  // S = 0 belongs to the high-clarity bucket.
  const StabilitySummary zero =
      stability_by_clarity(std::vector<StabilityEntry>{{0.5, 0.0}});
  CHECK(zero.n_high == 1);
  CHECK(zero.n_low == 0);
}

TEST_CASE("remote judge round-trips through a local endpoint with caching") {
  JudgeServer server;
  auto cache = std::make_shared<JudgeCache>();
  RemoteJudge judge(server.endpoint(), cache);
  judge.set_question("integral of x^2");

  const std::vector<std::string> seq = labels({"A", "B", "A", "B"});
  const ClusterSet set = cluster_solutions(seq, judge);
  CHECK(members_of(set) == std::vector<std::vector<std::size_t>>{{0, 2}, {1, 3}});
  CHECK(set.judge_calls == 4);
  // Four logical comparisons, but (A,B) repeats and is served from the
  // cache: only (A,B), (A,A), (B,B) reach the wire.
  CHECK(server.hits() == 3);
  CHECK(cache->size() == 3);
  CHECK(server.last_question() == "integral of x^2");

  // A second pass is fully cached.
  RemoteJudge warm(server.endpoint(), cache);
  const ClusterSet again = cluster_solutions(seq, warm);
  CHECK(members_of(again) == members_of(set));
  CHECK(server.hits() == 3);
}

TEST_CASE("remote judge failures raise JudgeFailure") {
  auto expect_failure = [](const std::string& endpoint) {
    RemoteJudge judge(endpoint, nullptr);
    try {
      judge.same_method("a", "b");
      FAIL("expected JudgeFailure for " << endpoint);
    } catch (const Error& e) {
      CHECK(e.code() == errc::judge_failure);
    }
  };
  expect_failure("http://127.0.0.1:1/judge");  // nothing listens there
  JudgeServer server;
  expect_failure(server.endpoint("/error"));   // HTTP 500
  expect_failure(server.endpoint("/broken"));  // schema violation
}

TEST_CASE("non-transitive judges still partition the input") {
  // "Same method" iff the labels differ by at most 1: 0~1, 1~2, but not 0~2.
  CallbackJudge judge([](const std::string&, const std::string& a,
                         const std::string& b) {
    return std::abs(std::stoi(a) - std::stoi(b)) <= 1;
  });
  const ClusterSet set = cluster_solutions(labels({"0", "2", "1"}), judge);
  // 2 opens its own cluster; 1 matches representative 0 first.
  CHECK(members_of(set) == std::vector<std::vector<std::size_t>>{{0, 2}, {1}});
  CHECK(set.total_members() == 3);
}
