#include "struggle/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "struggle/ingest.hpp"
#include "struggle/text.hpp"

namespace struggle::synth {

namespace {

using Rng = std::mt19937_64;

constexpr std::string_view kModifiers[] = {"best", "how", "to",   "near",  "cheap", "2020",
                                           "review", "vs", "free", "online", "guide", "top",
                                           "new",  "list", "ideas", "tips"};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

double uniform(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

double normal(Rng& rng, double mean, double sd) {
  return std::normal_distribution<double>(mean, sd)(rng);
}

int poisson(Rng& rng, double mean) {
  if (mean <= 0) return 0;
  return std::poisson_distribution<int>(mean)(rng);
}

// Zipf(1) rank in [0, n).
std::size_t zipf_rank(Rng& rng, std::size_t n) {
  double total = 0;
  for (std::size_t r = 1; r <= n; ++r) total += 1.0 / static_cast<double>(r);
  double u = uniform(rng) * total;
  for (std::size_t r = 1; r <= n; ++r) {
    u -= 1.0 / static_cast<double>(r);
    if (u <= 0) return r - 1;
  }
  return n - 1;
}

std::vector<std::string> alnum_keywords(const TaxonomyCategory& c) {
  std::vector<std::string> out;
  for (const auto& k : c.keywords) {
    for (auto& t : text::alnum_tokens(k)) out.push_back(std::move(t));
  }
  return out;
}

std::string join(const std::vector<std::string>& terms) {
  std::string out;
  for (const auto& t : terms) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::string random_term(Rng& rng, const std::vector<std::string>& keywords) {
  if (uniform(rng) < 0.7) return keywords[pick(rng, keywords.size())];
  return std::string(kModifiers[pick(rng, std::size(kModifiers))]);
}

const TaxonomyCategory& category_by_name(const Taxonomy& tax, const std::string& name) {
  for (const auto& c : tax.categories()) {
    if (c.name == name) return c;
  }
  throw ConfigError("simulation topic '" + name + "' is not in the taxonomy");
}

enum class Reform { Repeat, Specialize, Generalize, Substitute, Restart };

// Wandering refines the query; frustration swaps terms or starts over.
Reform choose_reform(Rng& rng, double wander, double frustration) {
  const double w[] = {0.5, 1.0 + wander, 0.6 + wander, 0.4 + frustration, 0.2 + 0.5 * frustration};
  double total = 0;
  for (double x : w) total += x;
  double u = uniform(rng) * total;
  for (int i = 0; i < 5; ++i) {
    u -= w[i];
    if (u <= 0) return static_cast<Reform>(i);
  }
  return Reform::Restart;
}

std::vector<std::string> reformulate(Rng& rng, std::vector<std::string> prev, Reform op,
                                     const std::vector<std::string>& keywords,
                                     const std::vector<std::string>& pool) {
  switch (op) {
    case Reform::Repeat:
      return prev;
    case Reform::Specialize: {
      const int n = 1 + (uniform(rng) < 0.3 ? 1 : 0);
      for (int i = 0; i < n; ++i) prev.push_back(random_term(rng, keywords));
      return prev;
    }
    case Reform::Generalize:
      if (prev.size() > 1) prev.erase(prev.begin() + static_cast<long>(pick(rng, prev.size())));
      return prev;
    case Reform::Substitute: {
      const int n = 1 + (uniform(rng) < 0.3 ? 1 : 0);
      for (int i = 0; i < n; ++i) prev[pick(rng, prev.size())] = random_term(rng, keywords);
      return prev;
    }
    case Reform::Restart:
      return text::query_terms(pool[zipf_rank(rng, pool.size())]);
  }
  return prev;
}

struct PendingClick {
  std::string url;
  ResultKind kind;
  bool bookmark;
};

}  // namespace

SimConfig SimConfig::defaults() {
  SimConfig c;
  c.telic.effort_mean = 3.0;
  c.telic.effort_std = 1.0;
  c.telic.curvature = 1.0;
  c.telic.wander_std = 0.2;
  c.telic.topics = {"Health", "Job", "Finance", "Education", "Legal", "Housing"};
  c.paratelic.effort_mean = 9.0;
  c.paratelic.effort_std = 2.0;
  c.paratelic.curvature = 0.25;
  c.paratelic.wander_std = 0.8;
  c.paratelic.topics = {"Entertainment", "Art", "Beauty", "Games", "Music", "Sports"};
  return c;
}

void SimConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid simulation config: ") + what);
  };
  check(n_sessions > 0, "n_sessions must be positive");
  check(paratelic_prior >= 0 && paratelic_prior <= 1, "paratelic_prior must lie in [0,1]");
  check(topic_fidelity >= 0 && topic_fidelity <= 1, "topic_fidelity must lie in [0,1]");
  check(mobile_share >= 0 && mobile_share <= 1, "mobile_share must lie in [0,1]");
  check(off_topic_click_rate >= 0 && off_topic_click_rate <= 1, "off_topic_click_rate in [0,1]");
  for (const auto* s : {&telic, &paratelic}) {
    check(s->effort_std > 0, "effort_std must be positive");
    check(s->curvature > 0, "curvature must be positive");
    check(s->wander_std > 0, "wander_std must be positive");
    check(!s->topics.empty(), "each state needs at least one topic");
  }
  check(quality_std > 0, "quality_std must be positive");
  check(telic.effort_mean < paratelic.effort_mean, "telic effort mean must be below paratelic");
  check(queries_per_effort >= 0 && clicks_per_effort >= 0 && zooms_per_effort >= 0 &&
            scrolls_base >= 0 && scrolls_per_frustration >= 0 && reform_per_frustration >= 0,
        "emission gains must be non-negative");
  check(dwell_base_s > 0, "dwell_base_s must be positive");
  check(count_noise >= 0 && dwell_log_std >= 0, "noise levels must be non-negative");
}

Label struggle_label(double effort, double happiness, const StateProfile& state,
                     double happiness_low) {
  return happiness < happiness_low && effort > state.effort_mean ? Label::Struggle
                                                                 : Label::NonStruggle;
}

std::vector<std::string> canonical_queries(const TaxonomyCategory& c, std::size_t n,
                                           std::uint64_t seed) {
  Rng rng(splitmix(seed ^ fnv1a(c.name) ^ 0x51ULL));
  const auto kw = alnum_keywords(c);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t attempts = 0; out.size() < n && attempts < 50 * n; ++attempts) {
    std::vector<std::string> terms{kw[pick(rng, kw.size())]};
    const int extra = poisson(rng, 1.2);
    for (int i = 0; i < extra; ++i) terms.push_back(random_term(rng, kw));
    auto q = join(terms);
    if (seen.insert(q).second) out.push_back(std::move(q));
  }
  return out;
}

std::vector<std::string> canonical_urls(const TaxonomyCategory& c, std::size_t n,
                                        std::uint64_t seed) {
  Rng rng(splitmix(seed ^ fnv1a(c.name) ^ 0x75ULL));
  const auto kw = alnum_keywords(c);
  std::vector<std::string> domains;
  for (int i = 0; i < 6; ++i) {
    domains.push_back(kw[pick(rng, kw.size())] + kw[pick(rng, kw.size())] + ".com");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back("https://www." + domains[pick(rng, domains.size())] + "/" +
                  kw[pick(rng, kw.size())] + "-" + kw[pick(rng, kw.size())] + "-" +
                  std::to_string(i));
  }
  return out;
}

SimOutput generate_sessions(const SimConfig& cfg, const Taxonomy& tax) {
  cfg.validate();
  for (const auto* s : {&cfg.telic, &cfg.paratelic}) {
    for (const auto& t : s->topics) (void)category_by_name(tax, t);
  }
  constexpr std::size_t kQueryPool = 60, kUrlPool = 30;
  std::map<std::string, std::vector<std::string>> query_pool, url_pool;
  for (const auto& c : tax.categories()) {
    query_pool[c.name] = canonical_queries(c, kQueryPool, cfg.seed);
    url_pool[c.name] = canonical_urls(c, kUrlPool, cfg.seed);
  }

  SimOutput out;
  out.sessions.reserve(cfg.n_sessions);
  for (std::size_t idx = 0; idx < cfg.n_sessions; ++idx) {
    Rng rng(splitmix(cfg.seed * 0x100000001b3ULL + idx));

    const bool para = uniform(rng) < cfg.paratelic_prior;
    const StateProfile& sp = para ? cfg.paratelic : cfg.telic;
    const StateProfile& other = para ? cfg.telic : cfg.paratelic;

    double effort = 0;
    for (int tries = 0; tries < 100; ++tries) {
      effort = normal(rng, sp.effort_mean, sp.effort_std);
      if (effort >= 0) break;
      effort = 0;
    }
    const double quality = normal(rng, 0.0, cfg.quality_std);
    const double dev = effort - sp.effort_mean;
    const double happiness = -sp.curvature * dev * dev + quality;
    const Label label = struggle_label(effort, happiness, sp, cfg.happiness_low);

    const auto& topic_list = uniform(rng) < cfg.topic_fidelity ? sp.topics : other.topics;
    const std::string topic = topic_list[pick(rng, topic_list.size())];
    const auto& cat = category_by_name(tax, topic);
    const auto keywords = alnum_keywords(cat);
    const auto& queries = query_pool.at(topic);
    const auto& urls = url_pool.at(topic);
    const StateProfile& topic_state = tax.assign_state(topic) == State::Paratelic ? cfg.paratelic
                                                                                   : cfg.telic;

    const bool mobile = uniform(rng) < cfg.mobile_share;
    const Platform platform = mobile ? Platform::Mobile : Platform::PC;
    char user[32];
    std::snprintf(user, sizeof user, "u%06zu", idx);
    const std::int64_t start = cfg.start_ms + static_cast<std::int64_t>(idx) * 1000;

    const double frustration = std::max(0.0, -quality);
    const double habit = std::max(0.0, normal(rng, 1.0, sp.wander_std));
    const double wander = std::abs(normal(rng, 0.0, sp.wander_std));
    const double reform_drive = cfg.reform_per_frustration * frustration;
    const double off_topic = std::min(1.0, cfg.off_topic_click_rate * (1.0 + wander));

    auto count = [&](double mean) {
      return std::max(0, static_cast<int>(std::lround(mean + normal(rng, 0.0, cfg.count_noise))));
    };
    const int nq = 1 + count(cfg.queries_per_effort * effort);
    const int n_clicks = count(cfg.clicks_per_effort * effort);
    const int n_zooms = count(cfg.zooms_per_effort * effort);
    std::vector<int> clicks_at(static_cast<std::size_t>(nq)), scrolls_at(clicks_at.size()),
        zooms_at(clicks_at.size());
    for (int i = 0; i < n_clicks; ++i) ++clicks_at[pick(rng, clicks_at.size())];
    for (auto& k : scrolls_at) k = count(cfg.scrolls_base * habit + cfg.scrolls_per_frustration * frustration);
    for (int i = 0; i < n_zooms; ++i) ++zooms_at[pick(rng, zooms_at.size())];

    ScreenSize screen = mobile ? ScreenSize{390, 844} : ScreenSize{1920, 1080};
    if (uniform(rng) < 0.4) screen = mobile ? ScreenSize{412, 915} : ScreenSize{1366, 768};
    const bool resizes = !mobile && uniform(rng) < 0.1;

    Session s;
    s.user_id = user;
    s.platform = platform;
    s.label = label;
    s.topic = topic;
    s.state = para ? State::Paratelic : State::Telic;

    std::int64_t t = start;
    auto event = [&](EventKind k) {
      RawEvent e;
      e.user_id = user;
      e.timestamp = t;
      e.kind = k;
      e.platform = platform;
      return e;
    };
    auto advance = [&](double lo_s, double hi_s) {
      t += static_cast<std::int64_t>(1000.0 * (lo_s + (hi_s - lo_s) * uniform(rng)));
    };

    std::vector<std::string> terms = text::query_terms(queries[zipf_rank(rng, queries.size())]);
    for (int q = 0; q < nq; ++q) {
      if (q > 0) {
        terms = reformulate(rng, terms, choose_reform(rng, 2.0 * wander, reform_drive), keywords, queries);
      }
      RawEvent qe = event(EventKind::Query);
      qe.query_text = join(terms);
      const double p_suggested = q == 0 ? 0.2 : 0.3;
      qe.query_source = uniform(rng) < p_suggested ? QuerySource::Suggested : QuerySource::Manual;
      qe.serp_image_impressions = poisson(rng, 4.0);
      if (q == 0) qe.screen_size = screen;
      s.events.push_back(std::move(qe));
      advance(2, 6);

      if (q == 0 && resizes) {
        RawEvent re = event(EventKind::Resize);
        re.screen_size = ScreenSize{1280, 720};
        s.events.push_back(std::move(re));
        advance(1, 3);
      }
      for (int z = 0; z < zooms_at[static_cast<std::size_t>(q)]; ++z) {
        s.events.push_back(event(EventKind::ZoomIn));
        advance(1, 3);
      }
      for (int k = 0; k < scrolls_at[static_cast<std::size_t>(q)]; ++k) {
        s.events.push_back(event(uniform(rng) < 0.3 ? EventKind::Pagination : EventKind::ScrollDown));
        advance(1, 4);
      }
      for (int c = 0; c < clicks_at[static_cast<std::size_t>(q)]; ++c) {
        const double u = uniform(rng);
        const bool bookmark = u < 0.03;
        const ResultKind rk = bookmark    ? ResultKind::Bookmark
                              : u < 0.15  ? ResultKind::Image
                              : u < 0.21  ? ResultKind::Ad
                                          : ResultKind::Web;
        std::string url;
        if (uniform(rng) < off_topic && topic_state.topics.size() > 1) {
          const auto& alt = topic_state.topics[pick(rng, topic_state.topics.size())];
          const auto& alt_urls = url_pool.at(alt);
          url = alt_urls[zipf_rank(rng, alt_urls.size())];
        } else {
          url = urls[zipf_rank(rng, urls.size())];
        }
        RawEvent ce = event(bookmark ? EventKind::BookmarkClick : EventKind::Click);
        ce.clicked_url = std::move(url);
        ce.result_kind = rk;
        s.events.push_back(std::move(ce));
        const double typical = std::max(
            1.0, cfg.dwell_base_s + cfg.dwell_per_effort_s * effort + cfg.dwell_per_quality_s * quality);
        const double dwell = std::exp(normal(rng, std::log(typical), cfg.dwell_log_std));
        t += static_cast<std::int64_t>(1000.0 * dwell);
      }
      advance(1, 3);
    }

    s.session_id = ingest::make_session_id(s.user_id, s.events.front().timestamp);
    out.truth.push_back({s.session_id, s.state, s.label, effort, happiness});
    out.sessions.push_back(std::move(s));
  }
  return out;
}

PopularityTable generate_popularity(const PopularityConfig& cfg, const Taxonomy& tax,
                                    const std::vector<Session>& sessions,
                                    const features::ExtractConfig& extract) {
  struct QueryAcc {
    double issues = 0, clicks = 0, sat = 0, fastback = 0;
    std::map<std::string, double> url_clicks;
  };
  std::map<std::string, QueryAcc> acc;
  std::map<std::string, double> url_freq;

  // Background population: one global Zipf ranking over all canonical queries
  // and one per category over its URL pool.
  std::vector<std::string> all_queries;
  for (const auto& c : tax.categories()) {
    for (auto& q : canonical_queries(c, cfg.queries_per_category, cfg.seed)) {
      all_queries.push_back(normalize_query(q));
    }
    const auto urls = canonical_urls(c, cfg.urls_per_category, cfg.seed);
    for (std::size_t r = 0; r < urls.size(); ++r) {
      url_freq[urls[r]] +=
          cfg.background_volume / std::pow(static_cast<double>(r + 1), cfg.zipf_exponent);
    }
  }
  std::sort(all_queries.begin(), all_queries.end());
  all_queries.erase(std::unique(all_queries.begin(), all_queries.end()), all_queries.end());
  Rng rank_rng(splitmix(cfg.seed ^ 0xb6ULL));
  for (std::size_t i = all_queries.size(); i > 1; --i) {
    std::swap(all_queries[i - 1], all_queries[rank_rng() % i]);
  }
  for (std::size_t r = 0; r < all_queries.size(); ++r) {
    const auto& q = all_queries[r];
    Rng rng(splitmix(cfg.seed ^ fnv1a(q)));
    auto& a = acc[q];
    a.issues = cfg.background_volume / std::pow(static_cast<double>(r + 1), cfg.zipf_exponent);
    const double per_issue = 0.4 + 1.2 * uniform(rng);
    a.clicks = a.issues * per_issue;
    a.sat = a.clicks * (0.3 + 0.4 * uniform(rng));
    a.fastback = a.clicks * (0.1 + 0.2 * uniform(rng));
    const std::size_t k = 1 + pick(rng, 5);
    for (std::size_t j = 0; j < k; ++j) a.url_clicks["bg:" + std::to_string(j)] = a.clicks / k;
  }

  // Session contributions.
  for (const auto& s : sessions) {
    std::string current;
    bool have_query = false;
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      const auto& e = s.events[i];
      if (e.kind == EventKind::Query) {
        current = normalize_query(e.query_text.value_or(""));
        have_query = true;
        acc[current].issues += 1;
      } else if (e.is_click()) {
        const auto& url = e.clicked_url.value_or("");
        url_freq[url] += 1;
        if (!have_query) continue;
        auto& a = acc[current];
        const double dwell = features::dwell_time(s, i, extract);
        a.clicks += 1;
        if (dwell >= extract.sat_threshold_s) a.sat += 1;
        if (dwell < 15.0) a.fastback += 1;
        a.url_clicks[url] += 1;
      }
    }
  }

  PopularityTable table;
  for (const auto& [q, a] : acc) {
    QueryPopularity rec;
    rec.frequency = a.issues;
    if (a.issues > 0) {
      rec.avg_clicks = a.clicks / a.issues;
      rec.avg_sat_clicks = a.sat / a.issues;
      rec.fastback_count = a.fastback / a.issues;
    }
    double total = 0;
    for (const auto& [_, c] : a.url_clicks) total += c;
    for (const auto& [_, c] : a.url_clicks) {
      if (c > 0) rec.click_entropy -= (c / total) * std::log(c / total);
    }
    rec.click_entropy = std::max(0.0, rec.click_entropy);
    table.set_query(q, rec);
  }
  for (const auto& [u, f] : url_freq) table.set_url(u, {f});
  return table;
}

void write_log(std::ostream& out, const std::vector<Session>& sessions) {
  for (const auto& s : sessions) {
    for (const auto& e : s.events) out << ingest::format_event(e) << '\n';
  }
}

void write_truth(std::ostream& out, const std::vector<Truth>& truth) {
  for (const auto& t : truth) {
    out << t.session_id << '\t' << to_string(t.state) << '\t' << to_string(t.label) << '\n';
  }
}

std::map<std::string, Truth> read_truth(std::istream& in) {
  if (!in) throw DataError("truth stream is not readable");
  std::map<std::string, Truth> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string id, state, label;
    if (!std::getline(ls, id, '\t') || !std::getline(ls, state, '\t') || !std::getline(ls, label)) {
      throw FormatError("truth line needs session_id, state and label");
    }
    if (!label.empty() && label.back() == '\r') label.pop_back();
    Truth t;
    t.session_id = id;
    t.state = parse_state(state);
    t.label = parse_label(label);
    out[id] = t;
  }
  return out;
}

namespace {
std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

void write_popularity(std::ostream& out, const PopularityTable& pop) {
  for (const auto& [q, r] : pop.queries()) {
    out << "q\t" << q << '\t' << g17(r.frequency) << '\t' << g17(r.avg_sat_clicks) << '\t'
        << g17(r.avg_clicks) << '\t' << g17(r.click_entropy) << '\t' << g17(r.fastback_count)
        << '\n';
  }
  for (const auto& [u, r] : pop.urls()) out << "u\t" << u << '\t' << g17(r.click_frequency) << '\n';
}

PopularityTable read_popularity(std::istream& in) {
  if (!in) throw DataError("popularity stream is not readable");
  PopularityTable pop;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, '\t')) cells.push_back(tok);
    try {
      if (cells.size() == 7 && cells[0] == "q") {
        pop.set_query(cells[1], {std::stod(cells[2]), std::stod(cells[3]), std::stod(cells[4]),
                                 std::stod(cells[5]), std::stod(cells[6])});
      } else if (cells.size() == 3 && cells[0] == "u") {
        pop.set_url(cells[1], {std::stod(cells[2])});
      } else {
        throw FormatError("unrecognized record");
      }
    } catch (const std::logic_error&) {
      throw FormatError("popularity line " + std::to_string(lineno) + ": bad number");
    } catch (const FormatError& e) {
      throw FormatError("popularity line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return pop;
}

std::vector<features::FeatureRow> generate_feature_rows(const FeatureSimConfig& cfg) {
  std::vector<features::FeatureRow> rows;
  rows.reserve(cfg.n_sessions);
  for (std::size_t idx = 0; idx < cfg.n_sessions; ++idx) {
    Rng rng(splitmix(cfg.seed * 0x100000001b3ULL + idx + 0x5eedULL));
    features::FeatureRow r;
    char id[32];
    std::snprintf(id, sizeof id, "f%06zu", idx);
    r.session_id = id;
    const bool para = uniform(rng) < cfg.paratelic_prior;
    r.state = para ? State::Paratelic : State::Telic;
    r.fv.topic = para ? "paratelic-topic" : "telic-topic";
    const double effort = normal(rng, 0.0, 1.0);
    r.label = effort > cfg.struggle_threshold ? Label::Struggle : Label::NonStruggle;
    for (std::size_t g = 0; g < kAllGroups.size(); ++g) {
      const double base = cfg.effort_loading[g] != 0 ? cfg.effort_loading[g] * effort
                                                     : normal(rng, 0.0, 1.0);
      const double latent = base + (para ? cfg.paratelic_shift[g] : 0.0) +
                            normal(rng, 0.0, cfg.latent_noise);
      for (auto f : features_in_group(kAllGroups[g])) {
        r.fv.values[f] = latent + normal(rng, 0.0, cfg.feature_noise);
      }
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace struggle::synth
