#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "struggle/features.hpp"
#include "struggle/model.hpp"
#include "struggle/taxonomy.hpp"

// Synthetic search sessions from a two-state arousal model.
//
// Each session draws a motivational state, an effort level from that state's
// normal distribution (truncated at 0), and a result-quality shock. Happiness
// is an inverted parabola around the state's effort mean plus the shock:
//
//   happiness = -curvature_s * (effort - mean_s)^2 + quality
//
// A session struggles when happiness < happiness_low on the high-effort side
// of its state's peak. Query, click, reading, and diversity counts scale with
// effort. Reformulation and scrolling are driven by poor result quality; a
// per-session wandering term (state-dependent spread) adds reformulations and
// off-topic clicks, and a browsing habit scales baseline scrolling.
namespace struggle::synth {

struct StateProfile {
  double effort_mean = 3.0;
  double effort_std = 1.0;
  double curvature = 1.0;
  double wander_std = 0.2;  // spread of the wandering term and browsing habit
  std::vector<std::string> topics;
};

struct SimConfig {
  std::size_t n_sessions = 2000;
  double paratelic_prior = 0.5;
  StateProfile telic;
  StateProfile paratelic;
  double quality_std = 1.5;
  double happiness_low = -0.3;
  // Probability that a session's topic comes from its own state's pool.
  double topic_fidelity = 0.97;
  double mobile_share = 0.52;

  // Emission gains.
  double queries_per_effort = 1.0;
  double clicks_per_effort = 1.5;
  double zooms_per_effort = 0.15;
  double scrolls_base = 1.0;
  double scrolls_per_frustration = 1.0;
  double dwell_base_s = 12.0;
  double dwell_per_effort_s = 4.0;
  double dwell_per_quality_s = 8.0;
  double reform_per_frustration = 1.2;
  double off_topic_click_rate = 0.15;
  // Counts are round(gain * driver + N(0, count_noise)), floored at 0.
  double count_noise = 0.15;
  double dwell_log_std = 0.1;

  std::uint64_t seed = 7;
  std::int64_t start_ms = 1606003200000;  // 2020-11-22T00:00:00Z

  // Telic Health/Job/Finance/..., paratelic Entertainment/Art/Beauty/...
  static SimConfig defaults();
  // Throws ConfigError.
  void validate() const;
};

struct Truth {
  std::string session_id;
  State state = State::Unassigned;
  Label label = Label::Unlabeled;
  double effort = 0;
  double happiness = 0;
};

struct SimOutput {
  std::vector<Session> sessions;  // labeled, state = ground truth, topic = drawn topic
  std::vector<Truth> truth;
};

// Deterministic in cfg (including the seed). Session ids match what the
// ingest segmenter produces for the emitted log.
SimOutput generate_sessions(const SimConfig& cfg, const Taxonomy& tax);

// The struggle rule as a pure function.
Label struggle_label(double effort, double happiness, const StateProfile& state,
                     double happiness_low);

struct PopularityConfig {
  std::size_t queries_per_category = 60;
  std::size_t urls_per_category = 30;
  double background_volume = 5000.0;  // issues of the most popular query
  double zipf_exponent = 1.0;
  std::uint64_t seed = 7;
};

// Zipf-distributed background population over the canonical query and URL
// pools of the taxonomy plus every query and click in `sessions`.
PopularityTable generate_popularity(const PopularityConfig& cfg, const Taxonomy& tax,
                                    const std::vector<Session>& sessions,
                                    const features::ExtractConfig& extract = {});

// Canonical per-category pools shared by the session generator and the
// popularity background.
std::vector<std::string> canonical_queries(const TaxonomyCategory& c, std::size_t n,
                                           std::uint64_t seed);
std::vector<std::string> canonical_urls(const TaxonomyCategory& c, std::size_t n,
                                        std::uint64_t seed);

// Emits the event log (one JSON line per event, time ordered per session).
void write_log(std::ostream& out, const std::vector<Session>& sessions);
// session_id TAB state TAB label
void write_truth(std::ostream& out, const std::vector<Truth>& truth);
std::map<std::string, Truth> read_truth(std::istream& in);
// Popularity file: "q" TAB query TAB frequency TAB avg_sat TAB avg_clicks TAB
// click_entropy TAB fastback, and "u" TAB url TAB click_frequency.
void write_popularity(std::ostream& out, const PopularityTable& pop);
PopularityTable read_popularity(std::istream& in);

// Feature-level generator for the group tests: every group has a latent
// score per session, each feature is its group latent plus noise.
struct FeatureSimConfig {
  std::size_t n_sessions = 2000;
  double paratelic_prior = 0.5;
  // Loading of each group's latent on the shared effort latent; groups with
  // loading 0 get an independent latent.
  std::array<double, 7> effort_loading = {1, 1, 1, 1, 1, 0, 0};
  // Paratelic minus telic mean of each group latent.
  std::array<double, 7> paratelic_shift = {0, 0, 0, 0, 0, 0, 0};
  double latent_noise = 0.5;
  double feature_noise = 0.3;
  double struggle_threshold = 0.6;  // on the effort latent
  std::uint64_t seed = 1;
};

std::vector<features::FeatureRow> generate_feature_rows(const FeatureSimConfig& cfg);

}  // namespace struggle::synth
