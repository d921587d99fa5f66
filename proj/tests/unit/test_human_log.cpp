#include <sstream>

#include "artex/metrics.hpp"
#include "helpers.hpp"

namespace artex {
namespace {

const std::string kHeader = "participant_id,trial_id,event_index,object_index,duration_s,final_answer\n";

std::vector<HumanTrialLog> parse(const std::string& body) {
  std::istringstream in(kHeader + body);
  return parse_human_log(in);
}

void expect_line_error(const std::string& body, const std::string& fragment) {
  try {
    parse(body);
    ADD_FAILURE() << "accepted: " << body;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LogParseError);
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(HumanLog, GroupsEventsByParticipantAndTrial) {
  const auto logs = parse(
      "p1,trial000,0,0,1.5,2\n"
      "p1,trial000,1,2,3.0,2\n"
      "p2,trial000,0,1,0.5,1\r\n"
      "\n"
      "p1,trial001,4,4,2.25,4\n");
  ASSERT_EQ(logs.size(), 3u);
  EXPECT_EQ(logs[0].participant_id, "p1");
  EXPECT_EQ(logs[0].events.size(), 2u);
  EXPECT_EQ(logs[0].final_answer, 2);
  EXPECT_DOUBLE_EQ(logs[0].events[1].duration_s, 3.0);
  EXPECT_EQ(logs[1].participant_id, "p2");
  EXPECT_EQ(logs[2].trial_id, "trial001");
  EXPECT_EQ(logs[2].events[0].object_index, 4);
}

TEST(HumanLog, ReportsOffendingLine) {
  expect_line_error("p1,t,0,0,1.0,2\np1,t,1,5,1.0,2\n", "line 3: object_index");
  expect_line_error("p1,t,0,0,1.0,2,extra\n", "line 2: expected 6 fields");
  expect_line_error("p1,t,x,0,1.0,2\n", "line 2: event_index");
  expect_line_error("p1,t,0,0,-1,2\n", "duration_s must be positive");
  expect_line_error("p1,t,0,0,abc,2\n", "duration_s 'abc'");
  expect_line_error("p1,t,0,0,1.0,5\n", "final_answer must lie");
  expect_line_error("p1,t,0,0,1.0,2\np1,t,1,0,1.0,3\n", "line 3: final_answer changes");
  expect_line_error("p1,t,3,0,1.0,2\np1,t,3,1,1.0,2\n", "event_index must increase");
  expect_line_error(",t,0,0,1.0,2\n", "participant_id is empty");
  expect_line_error("p1,\"t,0,0,1.0,2\n", "unterminated quote");
}

TEST(HumanLog, HeaderIsRequired) {
  std::istringstream wrong("participant,trial,event,object,duration,answer\n");
  EXPECT_ARTEX_ERROR(parse_human_log(wrong), ErrorCode::LogParseError);
  std::istringstream empty("");
  EXPECT_ARTEX_ERROR(parse_human_log(empty), ErrorCode::LogParseError);
  EXPECT_ARTEX_ERROR(load_human_log("/nonexistent/log.csv"), ErrorCode::IoError);
}

}  // namespace
}  // namespace artex
