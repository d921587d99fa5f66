#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "artex/csv.hpp"
#include "artex/error.hpp"
#include "artex/metrics.hpp"

namespace artex {

namespace {

constexpr const char* kHeader = "participant_id,trial_id,event_index,object_index,duration_s,final_answer";

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::LogParseError, "line " + std::to_string(line) + ": " + what);
}

int parse_int(const std::string& text, std::size_t line, const char* field) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    fail(line, std::string(field) + " '" + text + "' is not an integer");
  return v;
}

double parse_real(const std::string& text, std::size_t line, const char* field) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0') fail(line, std::string(field) + " '" + text + "' is not a number");
  return v;
}

}  // namespace

std::vector<HumanTrialLog> parse_human_log(std::istream& in) {
  std::string text;
  std::size_t line = 0;
  std::vector<std::string> fields;
  bool have_header = false;
  std::vector<HumanTrialLog> logs;
  std::map<std::pair<std::string, std::string>, std::size_t> index;

  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (text.find_first_not_of(" \t") == std::string::npos) continue;
    if (!have_header) {
      if (text != kHeader) fail(line, std::string("expected header '") + kHeader + "'");
      have_header = true;
      continue;
    }
    if (!split_csv_line(text, fields)) fail(line, "unterminated quote");
    if (fields.size() != 6) fail(line, "expected 6 fields, found " + std::to_string(fields.size()));
    if (fields[0].empty()) fail(line, "participant_id is empty");
    if (fields[1].empty()) fail(line, "trial_id is empty");

    VisitEvent e;
    e.event_index = parse_int(fields[2], line, "event_index");
    e.object_index = parse_int(fields[3], line, "object_index");
    e.duration_s = parse_real(fields[4], line, "duration_s");
    const int answer = parse_int(fields[5], line, "final_answer");
    if (e.object_index < 0 || e.object_index >= kPlatforms) fail(line, "object_index must lie in 0..4");
    if (!(e.duration_s > 0.0) || !std::isfinite(e.duration_s)) fail(line, "duration_s must be positive");
    if (answer < 1 || answer > kComparisonPlatforms) fail(line, "final_answer must lie in 1..4");

    const auto key = std::make_pair(fields[0], fields[1]);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, logs.size()).first;
      logs.push_back({fields[0], fields[1], {}, answer});
    }
    HumanTrialLog& log = logs[it->second];
    if (log.final_answer != answer) fail(line, "final_answer changes within a trial");
    if (!log.events.empty() && e.event_index <= log.events.back().event_index)
      fail(line, "event_index must increase within a trial");
    log.events.push_back(e);
  }
  if (!have_header) fail(line + 1, "missing header");
  return logs;
}

std::vector<HumanTrialLog> load_human_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return parse_human_log(in);
}

}  // namespace artex
