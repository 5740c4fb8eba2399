#include "doctest.h"

#include <sstream>

#include "golden_sessions.hpp"
#include "struggle/taxonomy.hpp"

using namespace struggle;

namespace {

Session clicks(std::initializer_list<const char*> urls) {
  Session s;
  s.user_id = "u";
  std::int64_t t = 0;
  for (const char* u : urls) {
    RawEvent e;
    e.user_id = "u";
    e.timestamp = t += 1000;
    e.kind = EventKind::Click;
    e.clicked_url = u;
    e.result_kind = ResultKind::Web;
    s.events.push_back(e);
  }
  return s;
}

}  // namespace

TEST_CASE("url scoring") {
  auto tax = golden::taxonomy();
  CHECK(tax.score_url("health-doctor-clinic-symptom-medicine", "Health") ==
        doctest::Approx(1.0));
  CHECK(tax.score_url("https://zzz-qqq", "Health") == 0.0);
  CHECK(tax.score_url("", "Health") == 0.0);
  CHECK_FALSE(tax.label_url("https://zzz.qqq/").has_value());

  auto b = Taxonomy::builtin();
  CHECK(b.score_url("best-horror-movies-2020", "Entertainment") >
        b.score_url("best-horror-movies-2020", "Finance"));
  CHECK(b.label_url("best-horror-movies-2020") == "Entertainment");
}

TEST_CASE("topic assignment") {
  auto b = Taxonomy::builtin();
  CHECK_FALSE(b.assign_topic(clicks({})).has_value());
  CHECK(b.assign_topic(clicks({"https://movies.com/tv", "https://celebrity-trailer.net",
                               "https://bank-loan.com"})) == "Entertainment");
  CHECK(b.assign_topic(clicks({"https://museum-gallery.org", "https://makeup-salon.com"})) ==
        "Art");
  CHECK(b.click_labels(clicks({"https://zzz.qqq", "https://chess-puzzle-games.com"})) ==
        std::vector<std::string>{"Games"});
}

TEST_CASE("state assignment") {
  auto b = Taxonomy::builtin();
  CHECK(b.assign_state(std::string("Finance")) == State::Telic);
  CHECK(b.assign_state(std::string("Entertainment")) == State::Paratelic);
  CHECK(b.assign_state(std::nullopt) == State::Unassigned);
  CHECK(b.assign_state(std::string("Nope")) == State::Unassigned);

  std::vector<Session> ss = {clicks({"https://doctor-clinic.org"}), clicks({})};
  assign_topics_and_states(ss, b);
  CHECK(ss[0].topic == "Health");
  CHECK(ss[0].state == State::Telic);
  CHECK(ss[1].state == State::Unassigned);
}

TEST_CASE("taxonomy file format") {
  std::istringstream in("# comment\n\ntelic\tA\ta,b\nparatelic\tB\tc\n");
  auto t = Taxonomy::parse(in);
  CHECK(t.names() == std::vector<std::string>{"A", "B"});
  std::stringstream out;
  write_taxonomy(out, Taxonomy::builtin());
  auto back = Taxonomy::parse(out);
  CHECK(back.names() == Taxonomy::builtin().names());
  CHECK(back.categories().size() == 12);

  std::istringstream dup("telic\tA\ta\ntelic\tA\tb\n");
  CHECK_THROWS_AS(Taxonomy::parse(dup), ConfigError);
  std::istringstream nokw("telic\tA\t\n");
  CHECK_THROWS_AS(Taxonomy::parse(nokw), ConfigError);
  std::istringstream bad("telic\tA\n");
  CHECK_THROWS_AS(Taxonomy::parse(bad), ConfigError);
  CHECK_THROWS_AS(Taxonomy({}), ConfigError);
}

TEST_CASE("shipped taxonomy file matches the built-in one") {
  auto t = Taxonomy::load(std::string(STRUGGLE_DATA_DIR) + "/taxonomy.tsv");
  std::ostringstream a, b;
  write_taxonomy(a, t);
  write_taxonomy(b, Taxonomy::builtin());
  CHECK(a.str() == b.str());
}
