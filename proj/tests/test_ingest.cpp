#include "doctest.h"

#include <sstream>

#include "struggle/ingest.hpp"

using namespace struggle;

namespace {

RawEvent query(const std::string& user, std::int64_t ts, const std::string& q) {
  RawEvent e;
  e.user_id = user;
  e.timestamp = ts;
  e.kind = EventKind::Query;
  e.query_text = q;
  e.query_source = QuerySource::Manual;
  return e;
}

RawEvent click(const std::string& user, std::int64_t ts, const std::string& url) {
  RawEvent e;
  e.user_id = user;
  e.timestamp = ts;
  e.kind = EventKind::Click;
  e.clicked_url = url;
  e.result_kind = ResultKind::Web;
  return e;
}

constexpr std::int64_t kMin = 60 * 1000;

}  // namespace

TEST_CASE("parse log") {
  std::istringstream empty("");
  auto r = ingest::parse_log(empty);
  CHECK(r.events.empty());
  CHECK(r.skipped == 0);

  std::istringstream one(R"({"user":"a","ts":5,"kind":"query","q":"hair dye","src":"manual"})");
  r = ingest::parse_log(one);
  REQUIRE(r.events.size() == 1);
  CHECK(r.events[0].kind == EventKind::Query);
  CHECK(*r.events[0].query_text == "hair dye");

  std::istringstream mixed(
      "{\"user\":\"a\",\"ts\":1,\"kind\":\"query\",\"q\":\"x\",\"src\":\"manual\"}\n"
      "{\"user\":\"a\",\"ts\":2,\"kind\":\"click\",\"url\":\"https://a.com\",\"rkind\":\"web\"}\n"
      "\n"
      "{\"user\":\"a\",\"ts\":3,\"kind\":\"scroll\"}\n"
      "{\"user\":\"a\",\"ts\":4,\"kind\":\"que\n");
  r = ingest::parse_log(mixed);
  CHECK(r.events.size() == 3);
  CHECK(r.skipped == 1);
}

TEST_CASE("mostly malformed log is rejected") {
  std::istringstream bad("{\n{\n{\"user\":\"a\",\"ts\":3,\"kind\":\"scroll\"}\n");
  CHECK_THROWS_AS(ingest::parse_log(bad), FormatError);
}

TEST_CASE("events missing per-kind fields are skipped") {
  std::istringstream in(
      "{\"user\":\"a\",\"ts\":1,\"kind\":\"query\",\"src\":\"manual\"}\n"
      "{\"user\":\"a\",\"ts\":2,\"kind\":\"scroll\"}\n"
      "{\"user\":\"a\",\"ts\":3,\"kind\":\"scroll\"}\n");
  auto r = ingest::parse_log(in);
  CHECK(r.events.size() == 2);
  CHECK(r.skipped == 1);
}

TEST_CASE("format_event round trips through parse_log") {
  RawEvent e = click("u1", 1234, "https://x.org/a");
  e.result_kind = ResultKind::Image;
  e.platform = Platform::Mobile;
  e.screen_size = ScreenSize{390, 844};
  e.session_hint = "s9";
  RawEvent q = query("u1", 1200, "Hair Dye");
  q.serp_image_impressions = 7;
  q.query_source = QuerySource::Suggested;
  std::istringstream in(ingest::format_event(q) + "\n" + ingest::format_event(e) + "\n");
  auto r = ingest::parse_log(in);
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0] == q);
  CHECK(r.events[1] == e);
}

TEST_CASE("segmentation") {
  ingest::SegmentConfig cfg;
  SUBCASE("gap without similarity splits") {
    auto s = ingest::segment_sessions({query("u", 0, "hair dye"), query("u", 45 * kMin, "chess")},
                                      cfg);
    CHECK(s.size() == 2);
  }
  SUBCASE("click inside the gap stays") {
    auto s = ingest::segment_sessions({query("u", 0, "hair dye"), click("u", 5000, "https://a")},
                                      cfg);
    REQUIRE(s.size() == 1);
    CHECK(s[0].events.size() == 2);
  }
  SUBCASE("similar query bridges the gap") {
    auto s = ingest::segment_sessions(
        {query("u", 0, "curly hair dye"), query("u", 40 * kMin, "hair dye brands")}, cfg);
    CHECK(s.size() == 1);
  }
  SUBCASE("users are separated and ordered") {
    auto s = ingest::segment_sessions({query("b", 0, "x"), query("a", 10, "y")}, cfg);
    REQUIRE(s.size() == 2);
    CHECK(s[0].user_id == "a");
    CHECK(s[0].session_id == ingest::make_session_id("a", 10));
  }
  SUBCASE("hints bypass the heuristic") {
    auto a = query("u", 0, "hair dye");
    auto b = query("u", 90 * kMin, "chess");
    a.session_hint = b.session_hint = "h";
    auto s = ingest::segment_sessions({a, b}, cfg);
    CHECK(s.size() == 1);
  }
  SUBCASE("unsorted input") {
    auto s = ingest::segment_sessions({click("u", 5000, "https://a"), query("u", 0, "x")}, cfg);
    REQUIRE(s.size() == 1);
    CHECK(s[0].events.front().timestamp == 0);
  }
}

TEST_CASE("session store round trip") {
  auto sessions = ingest::segment_sessions(
      {query("u", 0, "hair dye"), click("u", 5000, "https://a.com/b"), query("v", 7, "chess")}, {});
  sessions[0].label = Label::Struggle;
  sessions[0].topic = "Beauty";
  sessions[0].state = State::Paratelic;
  std::stringstream buf;
  ingest::write_sessions(buf, sessions);
  auto back = ingest::read_sessions(buf);
  CHECK(back == sessions);
}
