#include "rlclarity/types.hpp"

#include <cmath>
#include <unordered_map>
#include <utility>

namespace rlclarity {

const char* errc_name(errc code) {
  switch (code) {
    case errc::empty_group: return "EmptyGroup";
    case errc::mixed_query_ids: return "MixedQueryIds";
    case errc::nonfinite_logprob: return "NonFiniteLogProb";
    case errc::positive_logprob: return "PositiveLogProb";
    case errc::invalid_reward: return "InvalidReward";
    case errc::empty_sequence: return "EmptySequence";
    case errc::partition_mismatch: return "PartitionMismatch";
    case errc::empty_rewards: return "EmptyRewards";
    case errc::missing_seed: return "MissingSeed";
    case errc::unknown_code: return "UnknownCode";
    case errc::count_mismatch: return "CountMismatch";
    case errc::judge_failure: return "JudgeFailure";
    case errc::parse_error: return "ParseError";
    case errc::empty_input: return "EmptyInput";
    case errc::io_error: return "IoError";
    case errc::insufficient_support: return "InsufficientSupport";
    case errc::bad_config: return "BadConfig";
    case errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

const char* severity_name(Severity severity) {
  switch (severity) {
    case Severity::High: return "High";
    case Severity::Mid: return "Mid";
    case Severity::Low: return "Low";
    case Severity::Other: return "Other";
  }
  return "Other";
}

Severity severity_of(const std::string& code) {
  static const std::unordered_map<std::string, Severity> kTable = {
      {"E1.1", Severity::High}, {"E1.2", Severity::High},
      {"E2.1", Severity::High}, {"E2.2", Severity::High},
      {"E5.1", Severity::High}, {"E5.2", Severity::High},
      {"E3.1", Severity::Mid},  {"E3.2", Severity::Mid},
      {"E4.1", Severity::Low},  {"E4.2", Severity::Low},
      {"E6.1", Severity::Other},
  };
  auto it = kTable.find(code);
  if (it == kTable.end()) {
    throw Error(errc::unknown_code, "unknown error taxonomy code: " + code);
  }
  return it->second;
}

RolloutGroup validate_group(std::vector<RolloutRecord> records) {
  if (records.empty()) {
    throw Error(errc::empty_group, "rollout group has no records");
  }
  const std::string& query_id = records.front().query_id;
  for (const RolloutRecord& record : records) {
    if (record.query_id != query_id) {
      throw Error(errc::mixed_query_ids,
                  "group mixes query ids '" + query_id + "' and '" +
                      record.query_id + "'");
    }
    if (record.token_logprobs.empty()) {
      throw Error(errc::empty_sequence,
                  "record '" + record.response_id + "' has no token logprobs");
    }
    for (double lp : record.token_logprobs) {
      if (!std::isfinite(lp)) {
        throw Error(errc::nonfinite_logprob,
                    "record '" + record.response_id +
                        "' has a non-finite token logprob");
      }
      if (lp > 0.0) {
        throw Error(errc::positive_logprob,
                    "record '" + record.response_id +
                        "' has a token logprob > 0");
      }
    }
    if (!(record.reward >= 0.0 && record.reward <= 1.0)) {
      throw Error(errc::invalid_reward,
                  "record '" + record.response_id +
                      "' has reward outside [0, 1]");
    }
  }
  return RolloutGroup{query_id, std::move(records)};
}

VerdictPartition partition_by_verdict(const RolloutGroup& group) {
  VerdictPartition partition;
  for (std::size_t i = 0; i < group.records.size(); ++i) {
    (group.records[i].correct ? partition.pos_indices : partition.neg_indices)
        .push_back(i);
  }
  return partition;
}

}  // namespace rlclarity
