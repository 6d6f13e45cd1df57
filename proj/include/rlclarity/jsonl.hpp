#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "rlclarity/types.hpp"

namespace rlclarity {

// Validated rollout groups keyed by query id, in ascending query_id order.
// This is the canonical in-memory form of a JSON-lines rollout log.
struct Dataset {
  std::vector<RolloutGroup> groups;

  const RolloutGroup* find(const std::string& query_id) const;
};

// Parses one RolloutRecord per line. Field names match the record struct;
// unknown fields are ignored, absent optional fields stay unset, and a
// missing reward defaults to the binary verdict. Parse failures throw
// errc::parse_error with the 1-based line number in the message.
std::vector<RolloutRecord> read_records(std::istream& in);

Dataset read_dataset(std::istream& in);
Dataset read_dataset_file(const std::string& path);

// CSV of (query_id, pass_rate) rows; a leading header line is skipped when
// its second column does not parse as a number.
std::map<std::string, double> read_pass_rate_csv(std::istream& in);
std::map<std::string, double> read_pass_rate_csv_file(const std::string& path);

}  // namespace rlclarity
