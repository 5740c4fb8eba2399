#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "struggle/model.hpp"

// Event-log ingestion.
//
// One JSON object per line:
//
//   user   string   required
//   ts     integer  required, milliseconds since epoch
//   kind   string   required: query | click | scroll | resize | zoom | bookmark | page
//   q      string   query text (query)
//   src    string   manual | suggested (query)
//   imgs   integer  image impressions on the result page (query, optional)
//   url    string   clicked URL (click, bookmark)
//   rkind  string   web | image | ad | bookmark (click, bookmark)
//   w, h   integer  screen size in logical pixels (resize, optional elsewhere)
//   sid    string   pre-assigned session id (optional)
//   plat   string   mobile | pc (optional, default pc)
//
// Blank lines are ignored. Lines that fail to parse or violate the per-kind
// requirements are skipped and counted.
namespace struggle::ingest {

struct ParseResult {
  std::vector<RawEvent> events;
  std::size_t skipped = 0;
};

// Throws DataError when the stream is unreadable and FormatError when more
// than half of the non-blank lines are malformed.
ParseResult parse_log(std::istream& in);

// Serializes one event as a log line (no trailing newline).
std::string format_event(const RawEvent& e);

struct SegmentConfig {
  double gap_minutes = 30.0;
  double sim_threshold = 0.1;
};

// Deterministic id: "<user>-<first timestamp>".
std::string make_session_id(const std::string& user, std::int64_t first_ts);

// Groups events into sessions. Events carrying a session hint are grouped by
// (user, hint) and bypass the heuristic. Otherwise a query opens a new
// session when the gap since the user's previous event exceeds gap_minutes
// and its term cosine with the previous query is below sim_threshold.
// Output is ordered by (user, first timestamp).
std::vector<Session> segment_sessions(std::vector<RawEvent> events, const SegmentConfig& cfg);

// Session store: one JSON object per line, bit-exact round trip.
void write_sessions(std::ostream& out, const std::vector<Session>& sessions);
std::vector<Session> read_sessions(std::istream& in);

}  // namespace struggle::ingest
