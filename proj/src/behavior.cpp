#include "rlclarity/behavior.hpp"

#include <algorithm>

#include "httplib.h"
#include "json.hpp"
#include "rlclarity/rng.hpp"

namespace rlclarity {

bool CallbackJudge::same_method(const std::string& a, const std::string& b) {
  return fn_(question_, a, b);
}

std::pair<std::uint64_t, std::uint64_t> JudgeCache::key(const std::string& a,
                                                        const std::string& b) {
  const std::uint64_t ha = rng::fnv1a64(a);
  const std::uint64_t hb = rng::fnv1a64(b);
  return {std::min(ha, hb), std::max(ha, hb)};
}

std::size_t JudgeCache::PairHash::operator()(
    const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
  std::uint64_t h = k.first;
  h ^= k.second + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

std::optional<bool> JudgeCache::lookup(const std::string& a,
                                       const std::string& b) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = map_.find(key(a, b));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void JudgeCache::store(const std::string& a, const std::string& b,
                       bool verdict) {
  std::lock_guard<std::mutex> lock(mu_);
  map_.emplace(key(a, b), verdict);
}

std::size_t JudgeCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return map_.size();
}

RemoteJudge::RemoteJudge(std::string endpoint,
                         std::shared_ptr<JudgeCache> cache)
    : cache_(std::move(cache)) {
  auto scheme = endpoint.find("://");
  auto path_start =
      endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) {
    host_ = endpoint;
    path_ = "/";
  } else {
    host_ = endpoint.substr(0, path_start);
    path_ = endpoint.substr(path_start);
  }
}

bool RemoteJudge::same_method(const std::string& a, const std::string& b) {
  if (cache_) {
    if (auto hit = cache_->lookup(a, b)) return *hit;
  }

  nlohmann::json body = {
      {"question", question_}, {"solution_a", a}, {"solution_b", b}};

  httplib::Client client(host_);
  client.set_connection_timeout(10, 0);
  client.set_read_timeout(60, 0);
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw Error(errc::judge_failure,
                "judge endpoint unreachable: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw Error(errc::judge_failure,
                "judge returned status " + std::to_string(res->status));
  }

  nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("is_same_method") ||
      !reply["is_same_method"].is_boolean()) {
    throw Error(errc::judge_failure, "judge reply missing is_same_method");
  }
  const bool verdict = reply["is_same_method"].get<bool>();
  if (cache_) cache_->store(a, b, verdict);
  return verdict;
}

std::size_t ClusterSet::total_members() const {
  std::size_t n = 0;
  for (const auto& c : clusters) n += c.members.size();
  return n;
}

ClusterSet cluster_solutions(std::span<const std::string> solutions,
                             JudgeOracle& judge) {
  ClusterSet out;
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    bool placed = false;
    for (auto& cluster : out.clusters) {
      ++out.judge_calls;
      if (judge.same_method(solutions[cluster.representative], solutions[i])) {
        cluster.members.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) {
      out.clusters.push_back({i, {i}});
    }
  }
  return out;
}

std::optional<double> distinct_ratio(const ClusterSet& clusters,
                                     std::size_t n_correct) {
  if (n_correct != clusters.total_members()) {
    throw Error(errc::count_mismatch,
                "n_correct does not match clustered solution count");
  }
  if (n_correct == 0) return std::nullopt;
  return static_cast<double>(clusters.clusters.size()) /
         static_cast<double>(n_correct);
}

AttributionSummary attribution_summary(
    std::span<const AttributionRecord> records) {
  AttributionSummary out;
  std::array<std::size_t, kSeverityCount> defined{};
  std::array<std::size_t, kSeverityCount> negative{};

  for (const auto& rec : records) {
    const auto sev = static_cast<std::size_t>(severity_of(rec.error_code));
    ++out.counts[sev];
    if (rec.s) {
      ++defined[sev];
      if (*rec.s < 0.0) ++negative[sev];
    }
  }
  out.total = records.size();

  for (std::size_t sev = 0; sev < kSeverityCount; ++sev) {
    if (out.total > 0) {
      out.proportions[sev] =
          static_cast<double>(out.counts[sev]) / static_cast<double>(out.total);
    }
    if (defined[sev] > 0) {
      out.s_neg_fraction[sev] = static_cast<double>(negative[sev]) /
                                static_cast<double>(defined[sev]);
    }
  }
  return out;
}

StabilitySummary stability_by_clarity(
    std::span<const StabilityEntry> entries) {
  StabilitySummary out;
  double sum_high = 0.0;
  double sum_low = 0.0;
  for (const auto& e : entries) {
    if (e.s >= 0.0) {
      ++out.n_high;
      sum_high += e.ratio;
    } else {
      ++out.n_low;
      sum_low += e.ratio;
    }
  }
  if (out.n_high > 0) out.mean_ratio_high = sum_high / out.n_high;
  if (out.n_low > 0) out.mean_ratio_low = sum_low / out.n_low;
  return out;
}

}  // namespace rlclarity
