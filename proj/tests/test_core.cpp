#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rlclarity/jsonl.hpp"
#include "rlclarity/types.hpp"

using namespace rlclarity;

namespace {

RolloutRecord make_record(const std::string& qid, const std::string& rid,
                          double logprob, bool correct) {
  RolloutRecord r;
  r.query_id = qid;
  r.response_id = rid;
  r.token_logprobs = {logprob};
  r.correct = correct;
  r.reward = correct ? 1.0 : 0.0;
  return r;
}

errc thrown_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return errc::invalid_argument;
}

}  // namespace

TEST_CASE("severity_of maps all eleven taxonomy codes") {
  for (const char* code : {"E1.1", "E1.2", "E2.1", "E2.2", "E5.1", "E5.2"}) {
    CHECK(severity_of(code) == Severity::High);
  }
  CHECK(severity_of("E3.1") == Severity::Mid);
  CHECK(severity_of("E3.2") == Severity::Mid);
  CHECK(severity_of("E4.1") == Severity::Low);
  CHECK(severity_of("E4.2") == Severity::Low);
  CHECK(severity_of("E6.1") == Severity::Other);
}

TEST_CASE("severity_of rejects anything outside the taxonomy") {
  CHECK(thrown_code([] { severity_of("E7.1"); }) == errc::unknown_code);
  CHECK(thrown_code([] { severity_of(""); }) == errc::unknown_code);
  CHECK(thrown_code([] { severity_of("e1.1"); }) == errc::unknown_code);
}

TEST_CASE("severity names") {
  CHECK(std::string(severity_name(Severity::High)) == "High");
  CHECK(std::string(severity_name(Severity::Mid)) == "Mid");
  CHECK(std::string(severity_name(Severity::Low)) == "Low");
  CHECK(std::string(severity_name(Severity::Other)) == "Other");
}

TEST_CASE("validate_group accepts a well-formed group unchanged") {
  std::vector<RolloutRecord> records;
  for (int i = 0; i < 16; ++i) {
    records.push_back(make_record("q1", "r" + std::to_string(i),
                                  -0.1 * (i + 1), i % 2 == 0));
  }
  const RolloutGroup group = validate_group(records);
  CHECK(group.query_id == "q1");
  CHECK(group.size() == 16);
  CHECK(group.records[3].response_id == "r3");

  const RolloutGroup again = validate_group(group.records);
  CHECK(again.records.size() == group.records.size());
  CHECK(again.records[7].token_logprobs == group.records[7].token_logprobs);
}

TEST_CASE("validate_group rejects each invariant violation") {
  CHECK(thrown_code([] { validate_group({}); }) == errc::empty_group);

  CHECK(thrown_code([] {
          validate_group(
              {make_record("q1", "r1", -1.0, true),
               make_record("q2", "r2", -1.0, false)});
        }) == errc::mixed_query_ids);

  CHECK(thrown_code([] {
          validate_group({make_record("q1", "r1", 0.1, true)});
        }) == errc::positive_logprob);

  CHECK(thrown_code([] {
          validate_group({make_record(
              "q1", "r1", std::numeric_limits<double>::quiet_NaN(), true)});
        }) == errc::nonfinite_logprob);

  CHECK(thrown_code([] {
          validate_group({make_record(
              "q1", "r1", -std::numeric_limits<double>::infinity(), true)});
        }) == errc::nonfinite_logprob);

  CHECK(thrown_code([] {
          RolloutRecord r = make_record("q1", "r1", -1.0, true);
          r.token_logprobs.clear();
          validate_group({r});
        }) == errc::empty_sequence);

  CHECK(thrown_code([] {
          RolloutRecord r = make_record("q1", "r1", -1.0, true);
          r.reward = 1.5;
          validate_group({r});
        }) == errc::invalid_reward);
}

TEST_CASE("zero logprobs (probability-1 tokens) are legal") {
  const RolloutGroup group =
      validate_group({make_record("q1", "r1", 0.0, true)});
  CHECK(group.records[0].token_logprobs[0] == 0.0);
}

TEST_CASE("partition_by_verdict splits indices") {
  const RolloutGroup group = validate_group({
      make_record("q1", "r1", -1.0, true),
      make_record("q1", "r2", -1.0, false),
      make_record("q1", "r3", -1.0, true),
  });
  const VerdictPartition p = partition_by_verdict(group);
  CHECK(p.pos_indices == std::vector<std::size_t>{0, 2});
  CHECK(p.neg_indices == std::vector<std::size_t>{1});
}

TEST_CASE("errc_name covers the catalogue") {
  CHECK(std::string(errc_name(errc::empty_group)) == "EmptyGroup");
  CHECK(std::string(errc_name(errc::judge_failure)) == "JudgeFailure");
  CHECK(std::string(errc_name(errc::bad_config)) == "BadConfig");
}

TEST_CASE("read_records parses fields and defaults") {
  std::istringstream in(R"({"query_id":"q1","response_id":"r1","token_logprobs":[-0.5,-0.25],"correct":true,"text":"use algebra","nonsense_field":42}
{"query_id":"q1","response_id":"r2","token_logprobs":[-1.0],"correct":false,"reward":0.25}
)");
  const std::vector<RolloutRecord> records = read_records(in);
  REQUIRE(records.size() == 2);
  CHECK(records[0].token_logprobs == std::vector<double>{-0.5, -0.25});
  CHECK(records[0].reward == 1.0);  // defaulted from correct
  CHECK(records[0].text.has_value());
  CHECK(*records[0].text == "use algebra");
  CHECK_FALSE(records[0].method_label.has_value());
  CHECK(records[1].reward == 0.25);  // explicit value overrides
  CHECK_FALSE(records[1].correct);
}

TEST_CASE("read_records names the offending line") {
  std::istringstream in(R"({"query_id":"q1","response_id":"r1","token_logprobs":[-0.5],"correct":true}
{"query_id":"q1","response_id":"r2","token_logprobs":"oops","correct":true}
)");
  try {
    read_records(in);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == errc::parse_error);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("read_records rejects empty input but skips blank lines") {
  std::istringstream empty("\n   \n");
  CHECK(thrown_code([&] { read_records(empty); }) == errc::empty_input);

  std::istringstream padded(
      "\n{\"query_id\":\"q1\",\"response_id\":\"r1\","
      "\"token_logprobs\":[-1.0],\"correct\":true}\n\n");
  CHECK(read_records(padded).size() == 1);
}

TEST_CASE("read_dataset groups interleaved lines and sorts by query id") {
  std::istringstream in(R"({"query_id":"qB","response_id":"r1","token_logprobs":[-1.0],"correct":true}
{"query_id":"qA","response_id":"r1","token_logprobs":[-1.0],"correct":false}
{"query_id":"qB","response_id":"r2","token_logprobs":[-2.0],"correct":false}
)");
  const Dataset ds = read_dataset(in);
  REQUIRE(ds.groups.size() == 2);
  CHECK(ds.groups[0].query_id == "qA");
  CHECK(ds.groups[1].query_id == "qB");
  CHECK(ds.groups[1].size() == 2);
  CHECK(ds.find("qB") == &ds.groups[1]);
  CHECK(ds.find("qC") == nullptr);
}

TEST_CASE("read_dataset_file loads the bundled fixture") {
  const Dataset ds =
      read_dataset_file(std::string(RLC_TEST_DATA_DIR) + "/rollouts_8q.jsonl");
  REQUIRE(ds.groups.size() == 8);
  std::size_t total = 0;
  for (const auto& group : ds.groups) total += group.size();
  CHECK(total == 32);
  const RolloutGroup* q005 = ds.find("q005");
  REQUIRE(q005 != nullptr);
  CHECK(q005->size() == 5);
  CHECK(q005->records[0].difficulty.has_value());
  CHECK(*q005->records[0].difficulty == "3");
}

TEST_CASE("read_dataset_file reports missing files") {
  CHECK(thrown_code([] { read_dataset_file("/nonexistent/nope.jsonl"); }) ==
        errc::io_error);
}

TEST_CASE("read_pass_rate_csv skips a header and parses rows") {
  std::istringstream in("query_id,pass_rate\nq1,0.5\nq2,0\n");
  const auto rates = read_pass_rate_csv(in);
  REQUIRE(rates.size() == 2);
  CHECK(rates.at("q1") == 0.5);
  CHECK(rates.at("q2") == 0.0);

  std::istringstream headerless("q1,0.25\n");
  CHECK(read_pass_rate_csv(headerless).at("q1") == 0.25);

  std::istringstream bad("q1,0.5\nq2,not-a-number\n");
  CHECK(thrown_code([&] { read_pass_rate_csv(bad); }) == errc::parse_error);
}
