#include "rlclarity/jsonl.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace rlclarity {

namespace {

using nlohmann::json;

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(errc::parse_error,
                std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

RolloutRecord parse_record(const json& obj) {
  if (!obj.is_object()) {
    throw Error(errc::parse_error, "record is not a JSON object");
  }
  RolloutRecord record;
  auto require = [&](const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      throw Error(errc::parse_error,
                  std::string("missing required field '") + key + "'");
    }
    return *it;
  };

  const json& qid = require("query_id");
  if (!qid.is_string()) {
    throw Error(errc::parse_error, "field 'query_id' must be a string");
  }
  record.query_id = qid.get<std::string>();

  const json& rid = require("response_id");
  if (!rid.is_string()) {
    throw Error(errc::parse_error, "field 'response_id' must be a string");
  }
  record.response_id = rid.get<std::string>();

  const json& lps = require("token_logprobs");
  if (!lps.is_array()) {
    throw Error(errc::parse_error, "field 'token_logprobs' must be an array");
  }
  record.token_logprobs.reserve(lps.size());
  for (const json& lp : lps) {
    if (!lp.is_number()) {
      throw Error(errc::parse_error,
                  "field 'token_logprobs' must contain numbers only");
    }
    record.token_logprobs.push_back(lp.get<double>());
  }

  const json& verdict = require("correct");
  if (!verdict.is_boolean()) {
    throw Error(errc::parse_error, "field 'correct' must be a boolean");
  }
  record.correct = verdict.get<bool>();

  auto reward_it = obj.find("reward");
  if (reward_it != obj.end() && !reward_it->is_null()) {
    if (!reward_it->is_number()) {
      throw Error(errc::parse_error, "field 'reward' must be a number");
    }
    record.reward = reward_it->get<double>();
  } else {
    record.reward = record.correct ? 1.0 : 0.0;
  }

  record.text = optional_string(obj, "text");
  record.method_label = optional_string(obj, "method_label");
  record.error_code = optional_string(obj, "error_code");
  record.difficulty = optional_string(obj, "difficulty");
  return record;
}

}  // namespace

const RolloutGroup* Dataset::find(const std::string& query_id) const {
  auto it = std::lower_bound(
      groups.begin(), groups.end(), query_id,
      [](const RolloutGroup& g, const std::string& q) { return g.query_id < q; });
  if (it == groups.end() || it->query_id != query_id) return nullptr;
  return &*it;
}

std::vector<RolloutRecord> read_records(std::istream& in) {
  std::vector<RolloutRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(parse_record(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(errc::parse_error, "line " + std::to_string(line_no) + ": " +
                                         e.what());
    } catch (const Error& e) {
      throw Error(e.code(),
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (records.empty()) {
    throw Error(errc::empty_input, "input contains no records");
  }
  return records;
}

Dataset read_dataset(std::istream& in) {
  std::vector<RolloutRecord> records = read_records(in);
  std::map<std::string, std::vector<RolloutRecord>> by_query;
  for (RolloutRecord& record : records) {
    by_query[record.query_id].push_back(std::move(record));
  }
  Dataset dataset;
  dataset.groups.reserve(by_query.size());
  for (auto& [query_id, group_records] : by_query) {
    dataset.groups.push_back(validate_group(std::move(group_records)));
  }
  return dataset;
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::io_error, "cannot open '" + path + "'");
  }
  return read_dataset(in);
}

std::map<std::string, double> read_pass_rate_csv(std::istream& in) {
  std::map<std::string, double> rates;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    const std::size_t comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw Error(errc::parse_error,
                  "line " + std::to_string(line_no) + ": expected 2 columns");
    }
    const std::string key = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    double rate = 0.0;
    auto [ptr, ec] =
        std::from_chars(value.data(), value.data() + value.size(), rate);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
      if (line_no == 1) continue;  // header row
      throw Error(errc::parse_error, "line " + std::to_string(line_no) +
                                         ": bad pass rate '" + value + "'");
    }
    rates[key] = rate;
  }
  return rates;
}

std::map<std::string, double> read_pass_rate_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(errc::io_error, "cannot open '" + path + "'");
  }
  return read_pass_rate_csv(in);
}

}  // namespace rlclarity
