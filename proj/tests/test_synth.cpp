#include "doctest.h"

#include <cmath>
#include <sstream>

#include "struggle/ingest.hpp"
#include "struggle/synth.hpp"

using namespace struggle;

namespace {

std::string log_of(const synth::SimOutput& o) {
  std::ostringstream out;
  synth::write_log(out, o.sessions);
  synth::write_truth(out, o.truth);
  return out.str();
}

Session hand_session(const std::string& user, std::int64_t t0, const std::string& q,
                     std::vector<std::string> urls) {
  Session s;
  s.user_id = user;
  s.session_id = user;
  RawEvent e;
  e.user_id = user;
  e.timestamp = t0;
  e.kind = EventKind::Query;
  e.query_text = q;
  e.query_source = QuerySource::Manual;
  s.events.push_back(e);
  for (const auto& u : urls) {
    RawEvent c;
    c.user_id = user;
    c.timestamp = s.events.back().timestamp + 5000;
    c.kind = EventKind::Click;
    c.clicked_url = u;
    c.result_kind = ResultKind::Web;
    s.events.push_back(c);
  }
  return s;
}

}  // namespace

TEST_CASE("config validation") {
  auto cfg = synth::SimConfig::defaults();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.telic.effort_mean < cfg.paratelic.effort_mean);
  auto bad = cfg;
  bad.paratelic_prior = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.telic.effort_std = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.telic.effort_mean = 20;
  CHECK_THROWS_AS(synth::generate_sessions(bad, Taxonomy::builtin()), ConfigError);
}

TEST_CASE("generation is deterministic") {
  auto cfg = synth::SimConfig::defaults();
  cfg.n_sessions = 300;
  auto tax = Taxonomy::builtin();
  auto a = synth::generate_sessions(cfg, tax);
  auto b = synth::generate_sessions(cfg, tax);
  CHECK(log_of(a) == log_of(b));
  cfg.seed = 8;
  CHECK(log_of(a) != log_of(synth::generate_sessions(cfg, tax)));
}

TEST_CASE("emitted log segments back into the same sessions") {
  auto cfg = synth::SimConfig::defaults();
  cfg.n_sessions = 300;
  auto out = synth::generate_sessions(cfg, Taxonomy::builtin());
  std::stringstream buf;
  synth::write_log(buf, out.sessions);
  auto parsed = ingest::parse_log(buf);
  CHECK(parsed.skipped == 0);
  auto sessions = ingest::segment_sessions(parsed.events, {});
  REQUIRE(sessions.size() == out.sessions.size());
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    CHECK(sessions[i].session_id == out.sessions[i].session_id);
    CHECK(sessions[i].events == out.sessions[i].events);
  }
}

TEST_CASE("degenerate prior") {
  auto cfg = synth::SimConfig::defaults();
  cfg.n_sessions = 200;
  cfg.paratelic_prior = 0;
  for (const auto& t : synth::generate_sessions(cfg, Taxonomy::builtin()).truth)
    CHECK(t.state == State::Telic);
}

TEST_CASE("paratelic effort mean") {
  auto cfg = synth::SimConfig::defaults();
  cfg.n_sessions = 10000;
  auto out = synth::generate_sessions(cfg, Taxonomy::builtin());
  double s = 0, s2 = 0, n = 0;
  for (const auto& t : out.truth)
    if (t.state == State::Paratelic) {
      s += t.effort;
      s2 += t.effort * t.effort;
      ++n;
    }
  double mean = s / n;
  double sd = std::sqrt((s2 - n * mean * mean) / (n - 1));
  CHECK(n > 4500);
  CHECK(std::abs(mean - cfg.paratelic.effort_mean) < 3 * sd / std::sqrt(n));
}

TEST_CASE("matched effort confound") {
  auto cfg = synth::SimConfig::defaults();
  cfg.n_sessions = 10000;
  auto out = synth::generate_sessions(cfg, Taxonomy::builtin());
  std::map<int, std::array<double, 4>> bins;  // telic n, telic struggle, para n, para struggle
  for (const auto& t : out.truth) {
    auto& b = bins[static_cast<int>(std::floor(t.effort))];
    int o = t.state == State::Telic ? 0 : 2;
    b[o] += 1;
    b[o + 1] += t.label == Label::Struggle;
  }
  int compared = 0;
  for (const auto& [bin, b] : bins) {
    if (b[0] < 30 || b[2] < 30) continue;
    INFO("effort bin " << bin);
    CHECK(b[1] / b[0] > b[3] / b[2]);
    ++compared;
  }
  CHECK(compared >= 2);
}

TEST_CASE("struggle rule") {
  synth::StateProfile p;
  p.effort_mean = 3;
  CHECK(synth::struggle_label(4, -1, p, -0.3) == Label::Struggle);
  CHECK(synth::struggle_label(2, -1, p, -0.3) == Label::NonStruggle);
  CHECK(synth::struggle_label(4, 0, p, -0.3) == Label::NonStruggle);
  auto cfg = synth::SimConfig::defaults();
  cfg.n_sessions = 500;
  auto out = synth::generate_sessions(cfg, Taxonomy::builtin());
  for (const auto& t : out.truth) {
    const auto& prof = t.state == State::Telic ? cfg.telic : cfg.paratelic;
    CHECK(t.label == synth::struggle_label(t.effort, t.happiness, prof, cfg.happiness_low));
  }
}

TEST_CASE("popularity") {
  auto tax = Taxonomy::builtin();
  synth::PopularityConfig pc;
  auto bg = synth::generate_popularity(pc, tax, {});
  CHECK(bg.queries().size() > 100);
  CHECK(bg == synth::generate_popularity(pc, tax, {}));
  for (const auto& [q, r] : bg.queries()) {
    CHECK(r.frequency > 0);
    CHECK(r.click_entropy >= 0);
    CHECK(r.avg_sat_clicks <= r.avg_clicks);
  }

  std::vector<Session> ss;
  for (int i = 0; i < 100; ++i)
    ss.push_back(hand_session("u" + std::to_string(i), i * 10'000'000LL, "zq often", {}));
  ss.push_back(hand_session("w", 0, "zq rare", {}));
  ss.push_back(hand_session("x", 0, "zq split", {"https://a.zz/1", "https://b.zz/2"}));
  auto t = synth::generate_popularity(pc, tax, ss);
  CHECK(t.query("zq often").frequency > t.query("zq rare").frequency);
  CHECK(t.query("zq split").click_entropy == doctest::Approx(std::log(2.0)));
  CHECK(t.query("zq split").fastback_count == 1);
  CHECK(t.url("https://a.zz/1").click_frequency == 1);
}

TEST_CASE("sidecar files round trip") {
  auto cfg = synth::SimConfig::defaults();
  cfg.n_sessions = 50;
  auto tax = Taxonomy::builtin();
  auto out = synth::generate_sessions(cfg, tax);
  std::stringstream tb;
  synth::write_truth(tb, out.truth);
  auto truth = synth::read_truth(tb);
  REQUIRE(truth.size() == out.truth.size());
  for (const auto& t : out.truth) {
    CHECK(truth.at(t.session_id).state == t.state);
    CHECK(truth.at(t.session_id).label == t.label);
  }
  auto pop = synth::generate_popularity({}, tax, out.sessions);
  std::stringstream pb;
  synth::write_popularity(pb, pop);
  CHECK(synth::read_popularity(pb) == pop);
}

TEST_CASE("feature-level generator") {
  synth::FeatureSimConfig fc;
  fc.n_sessions = 400;
  auto a = synth::generate_feature_rows(fc);
  CHECK(a == synth::generate_feature_rows(fc));
  REQUIRE(a.size() == 400);
  std::size_t pos = 0;
  for (const auto& r : a) {
    CHECK(r.state != State::Unassigned);
    pos += r.label == Label::Struggle;
  }
  CHECK(pos > 0);
  CHECK(pos < 400);
}
