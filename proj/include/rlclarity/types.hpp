#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rlclarity {

enum class errc {
  empty_group,
  mixed_query_ids,
  nonfinite_logprob,
  positive_logprob,
  invalid_reward,
  empty_sequence,
  partition_mismatch,
  empty_rewards,
  missing_seed,
  unknown_code,
  count_mismatch,
  judge_failure,
  parse_error,
  empty_input,
  io_error,
  insufficient_support,
  bad_config,
  invalid_argument,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

// One sampled response to a query. `token_logprobs` holds natural-log token
// probabilities (all finite and <= 0). `reward` defaults to the binary
// verdict; explicit values must stay in [0, 1].
struct RolloutRecord {
  std::string query_id;
  std::string response_id;
  std::vector<double> token_logprobs;
  bool correct = false;
  double reward = 0.0;
  std::optional<std::string> text;
  std::optional<std::string> method_label;
  std::optional<std::string> error_code;
  std::optional<std::string> difficulty;
};

// All G responses sampled for one query. Immutable after validation; safe
// to share across threads.
struct RolloutGroup {
  std::string query_id;
  std::vector<RolloutRecord> records;

  std::size_t size() const { return records.size(); }
};

// Index split of a group into correct / incorrect records.
struct VerdictPartition {
  std::vector<std::size_t> pos_indices;
  std::vector<std::size_t> neg_indices;
};

enum class Severity { High, Mid, Low, Other };

inline constexpr std::size_t kSeverityCount = 4;

const char* severity_name(Severity severity);

// Total mapping from the eleven error taxonomy codes (E1.1 .. E6.1) to a
// severity tier. Throws errc::unknown_code for anything else.
Severity severity_of(const std::string& code);

// Checks every record invariant and the shared-query-id requirement, then
// assembles the group. Records with absent rewards must already carry the
// binary default (the JSONL reader fills it in).
RolloutGroup validate_group(std::vector<RolloutRecord> records);

VerdictPartition partition_by_verdict(const RolloutGroup& group);

}  // namespace rlclarity
