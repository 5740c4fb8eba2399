#include "struggle/ingest.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include <json.hpp>

#include "struggle/text.hpp"

namespace struggle::ingest {

using nlohmann::json;

namespace {

json event_to_json(const RawEvent& e) {
  json j;
  j["user"] = e.user_id;
  j["ts"] = e.timestamp;
  j["kind"] = to_string(e.kind);
  if (e.query_text) j["q"] = *e.query_text;
  if (e.query_source) j["src"] = to_string(*e.query_source);
  if (e.serp_image_impressions) j["imgs"] = *e.serp_image_impressions;
  if (e.clicked_url) j["url"] = *e.clicked_url;
  if (e.result_kind) j["rkind"] = to_string(*e.result_kind);
  if (e.screen_size) {
    j["w"] = e.screen_size->width;
    j["h"] = e.screen_size->height;
  }
  if (e.session_hint) j["sid"] = *e.session_hint;
  if (e.platform) j["plat"] = to_string(*e.platform);
  return j;
}

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

RawEvent event_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("event is not an object");
  RawEvent e;
  e.user_id = j.at("user").get<std::string>();
  const auto& ts = j.at("ts");
  if (!ts.is_number_integer()) throw FormatError("ts must be an integer");
  e.timestamp = ts.get<std::int64_t>();
  e.kind = parse_event_kind(j.at("kind").get<std::string>());
  e.query_text = opt<std::string>(j, "q");
  if (auto s = opt<std::string>(j, "src")) e.query_source = parse_query_source(*s);
  e.serp_image_impressions = opt<std::int64_t>(j, "imgs");
  e.clicked_url = opt<std::string>(j, "url");
  if (auto s = opt<std::string>(j, "rkind")) e.result_kind = parse_result_kind(*s);
  auto w = opt<int>(j, "w");
  auto h = opt<int>(j, "h");
  if (w && h) e.screen_size = ScreenSize{*w, *h};
  e.session_hint = opt<std::string>(j, "sid");
  if (auto s = opt<std::string>(j, "plat")) e.platform = parse_platform(*s);
  validate(e);
  return e;
}

Session make_session(const std::string& id, std::vector<RawEvent> events) {
  Session s;
  s.session_id = id;
  s.user_id = events.front().user_id;
  for (const auto& e : events) {
    if (e.platform) {
      s.platform = *e.platform;
      break;
    }
  }
  s.events = std::move(events);
  return s;
}

}  // namespace

ParseResult parse_log(std::istream& in) {
  if (!in) throw DataError("log stream is not readable");
  ParseResult result;
  std::size_t lines = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++lines;
    try {
      result.events.push_back(event_from_json(json::parse(line)));
    } catch (const json::exception&) {
      ++result.skipped;
    } catch (const FormatError&) {
      ++result.skipped;
    }
  }
  if (in.bad()) throw DataError("error while reading log stream");
  if (lines > 0 && 2 * result.skipped > lines) {
    throw FormatError(std::to_string(result.skipped) + " of " + std::to_string(lines) +
                      " lines malformed; not an event log?");
  }
  return result;
}

std::string format_event(const RawEvent& e) { return event_to_json(e).dump(); }

std::string make_session_id(const std::string& user, std::int64_t first_ts) {
  return user + "-" + std::to_string(first_ts);
}

std::vector<Session> segment_sessions(std::vector<RawEvent> events, const SegmentConfig& cfg) {
  std::stable_sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.timestamp < b.timestamp;
  });

  const auto gap_ms = static_cast<std::int64_t>(cfg.gap_minutes * 60'000.0);
  std::vector<Session> out;

  // Hinted events: grouped by (user, sid), order preserved.
  std::map<std::pair<std::string, std::string>, std::vector<RawEvent>> hinted;

  std::vector<RawEvent> current;
  auto flush = [&] {
    if (current.empty()) return;
    const auto id = make_session_id(current.front().user_id, current.front().timestamp);
    out.push_back(make_session(id, std::move(current)));
    current.clear();
  };

  std::string user;
  std::int64_t last_ts = 0;
  std::string last_query_text;
  bool have_query = false;
  for (auto& e : events) {
    if (e.session_hint) {
      hinted[{e.user_id, *e.session_hint}].push_back(std::move(e));
      continue;
    }
    if (e.user_id != user) {
      flush();
      user = e.user_id;
      have_query = false;
    } else if (e.kind == EventKind::Query && !current.empty()) {
      const bool long_gap = e.timestamp - last_ts > gap_ms;
      const double sim = have_query ? text::query_cosine(*e.query_text, last_query_text) : 0.0;
      if (long_gap && sim < cfg.sim_threshold) flush();
    }
    last_ts = e.timestamp;
    if (e.kind == EventKind::Query) {
      last_query_text = *e.query_text;
      have_query = true;
    }
    current.push_back(std::move(e));
  }
  flush();

  for (auto& [key, evs] : hinted) out.push_back(make_session(key.second, std::move(evs)));

  std::stable_sort(out.begin(), out.end(), [](const Session& a, const Session& b) {
    if (a.user_id != b.user_id) return a.user_id < b.user_id;
    return a.events.front().timestamp < b.events.front().timestamp;
  });
  return out;
}

void write_sessions(std::ostream& out, const std::vector<Session>& sessions) {
  for (const auto& s : sessions) {
    json j;
    j["sid"] = s.session_id;
    j["user"] = s.user_id;
    j["platform"] = to_string(s.platform);
    j["label"] = to_string(s.label);
    j["state"] = to_string(s.state);
    if (s.topic) j["topic"] = *s.topic;
    json evs = json::array();
    for (const auto& e : s.events) evs.push_back(event_to_json(e));
    j["events"] = std::move(evs);
    out << j.dump() << '\n';
  }
}

std::vector<Session> read_sessions(std::istream& in) {
  if (!in) throw DataError("session stream is not readable");
  std::vector<Session> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Session s;
      s.session_id = j.at("sid").get<std::string>();
      s.user_id = j.at("user").get<std::string>();
      s.platform = parse_platform(j.at("platform").get<std::string>());
      s.label = parse_label(j.at("label").get<std::string>());
      s.state = parse_state(j.at("state").get<std::string>());
      s.topic = opt<std::string>(j, "topic");
      for (const auto& ej : j.at("events")) s.events.push_back(event_from_json(ej));
      validate(s);
      out.push_back(std::move(s));
    } catch (const json::exception& ex) {
      throw FormatError("session store line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace struggle::ingest
