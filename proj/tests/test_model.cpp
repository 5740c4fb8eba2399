#include "doctest.h"

#include <set>

#include "struggle/model.hpp"

using namespace struggle;

TEST_CASE("feature dictionary has 58 unique names over 7 groups") {
  CHECK(feature_count() == 58);
  std::set<std::string_view> names;
  std::size_t total = 0;
  for (auto g : kAllGroups) {
    auto idx = features_in_group(g);
    CHECK(!idx.empty());
    total += idx.size();
  }
  for (const auto& f : feature_dictionary()) names.insert(f.name);
  CHECK(names.size() == 58);
  CHECK(total == 58);
  CHECK(feature_index("num_queries") < 58);
  CHECK_THROWS_AS(feature_index("no_such_feature"), std::out_of_range);
}

TEST_CASE("enum names round trip") {
  for (auto k : {EventKind::Query, EventKind::Click, EventKind::ScrollDown, EventKind::Resize,
                 EventKind::ZoomIn, EventKind::BookmarkClick, EventKind::Pagination})
    CHECK(parse_event_kind(to_string(k)) == k);
  for (auto s : {QuerySource::Manual, QuerySource::Suggested})
    CHECK(parse_query_source(to_string(s)) == s);
  for (auto r : {ResultKind::Web, ResultKind::Image, ResultKind::Ad, ResultKind::Bookmark})
    CHECK(parse_result_kind(to_string(r)) == r);
  for (auto p : {Platform::Mobile, Platform::PC}) CHECK(parse_platform(to_string(p)) == p);
  for (auto l : {Label::Struggle, Label::NonStruggle, Label::Unlabeled})
    CHECK(parse_label(to_string(l)) == l);
  for (auto s : {State::Telic, State::Paratelic, State::Unassigned})
    CHECK(parse_state(to_string(s)) == s);
  for (auto g : kAllGroups) CHECK(parse_group(to_string(g)) == g);
  CHECK_THROWS_AS(parse_event_kind("hover"), FormatError);
}

TEST_CASE("event validation") {
  RawEvent q;
  q.user_id = "u";
  q.kind = EventKind::Query;
  CHECK_THROWS_AS(validate(q), FormatError);
  q.query_text = "x";
  q.query_source = QuerySource::Manual;
  CHECK_NOTHROW(validate(q));

  RawEvent c;
  c.user_id = "u";
  c.kind = EventKind::Click;
  c.clicked_url = "https://a.com";
  CHECK_THROWS_AS(validate(c), FormatError);
  c.result_kind = ResultKind::Web;
  CHECK_NOTHROW(validate(c));
}

TEST_CASE("session validation") {
  Session s;
  s.user_id = "u";
  CHECK_THROWS_AS(validate(s), DataError);
  RawEvent a;
  a.user_id = "u";
  a.kind = EventKind::ScrollDown;
  a.timestamp = 10;
  RawEvent b = a;
  b.timestamp = 5;
  s.events = {a, b};
  CHECK_THROWS_AS(validate(s), DataError);
  b.timestamp = 20;
  b.user_id = "v";
  s.events = {a, b};
  CHECK_THROWS_AS(validate(s), DataError);
  b.user_id = "u";
  s.events = {a, b};
  CHECK_NOTHROW(validate(s));
}

TEST_CASE("query normalization and popularity lookup") {
  CHECK(normalize_query("  Hair   DYE ") == "hair dye");
  PopularityTable t;
  t.set_query("Hair Dye", {3, 1, 2, 0.5, 0});
  CHECK(t.query("hair  dye").frequency == 3);
  CHECK(t.query("unseen") == QueryPopularity{});
  CHECK(t.url("https://x") == UrlPopularity{});
}

TEST_CASE("feature vector named access") {
  FeatureVector fv;
  CHECK(fv.values.size() == feature_count());
  fv["total_clicks"] = 4;
  CHECK(fv.values[feature_index("total_clicks")] == 4);
}
