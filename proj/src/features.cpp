#include "struggle/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "struggle/text.hpp"

namespace struggle::features {

namespace {

double seconds(std::int64_t ms) { return static_cast<double>(ms) / 1000.0; }

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct TermDiff {
  double added = 0, removed = 0, retained = 0;
};

// Multiset differences between adjacent queries' terms.
TermDiff term_diff(const std::vector<std::string>& prev, const std::vector<std::string>& cur) {
  std::map<std::string, int> p, c;
  for (const auto& t : prev) ++p[t];
  for (const auto& t : cur) ++c[t];
  TermDiff d;
  for (const auto& [t, n] : c) {
    const int m = p.count(t) ? p[t] : 0;
    d.retained += std::min(n, m);
    d.added += std::max(0, n - m);
  }
  for (const auto& [t, m] : p) {
    const int n = c.count(t) ? c[t] : 0;
    d.removed += std::max(0, m - n);
  }
  return d;
}

struct Click {
  std::size_t event_index;
  int query;  // index into the session's query list, -1 before the first query
  double dwell;
  bool sat;
};

}  // namespace

double dwell_time(const Session& s, std::size_t index, const ExtractConfig& cfg) {
  if (index + 1 >= s.events.size()) return cfg.default_dwell_s;
  return std::max(0.0, seconds(s.events[index + 1].timestamp - s.events[index].timestamp));
}

bool sat_click(const Session& s, std::size_t index, double threshold_s) {
  ExtractConfig cfg;
  return dwell_time(s, index, cfg) >= threshold_s;
}

double topic_entropy(const std::vector<std::string>& labels) {
  if (labels.size() < 2) return 0.0;
  std::map<std::string, double> counts;
  for (const auto& l : labels) counts[l] += 1.0;
  const double n = static_cast<double>(labels.size());
  double h = 0;
  for (const auto& [_, c] : counts) {
    const double p = c / n;
    h -= p * std::log(p);
  }
  return std::max(0.0, h);
}

double topic_entropy(const Session& s, const Taxonomy& tax) {
  return topic_entropy(tax.click_labels(s));
}

FeatureVector extract(const Session& s, const PopularityTable& pop, const Taxonomy& tax,
                      const ExtractConfig& cfg) {
  FeatureVector fv;
  fv.topic = s.topic.value_or("");
  if (s.events.empty()) return fv;

  std::vector<std::size_t> query_events;
  std::vector<std::vector<std::string>> terms;
  std::vector<std::string> norm_queries;
  std::vector<Click> clicks;
  std::size_t manual = 0, suggested = 0, zooms = 0, scrolls = 0;
  double image_impressions = 0, screen_mp = 0;

  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& e = s.events[i];
    switch (e.kind) {
      case EventKind::Query:
        query_events.push_back(i);
        terms.push_back(text::query_terms(e.query_text.value_or("")));
        norm_queries.push_back(normalize_query(e.query_text.value_or("")));
        if (e.query_source == QuerySource::Manual) ++manual;
        if (e.query_source == QuerySource::Suggested) ++suggested;
        image_impressions += static_cast<double>(e.serp_image_impressions.value_or(0));
        break;
      case EventKind::Click:
      case EventKind::BookmarkClick: {
        const double d = dwell_time(s, i, cfg);
        clicks.push_back({i, static_cast<int>(query_events.size()) - 1, d,
                          d >= cfg.sat_threshold_s});
        break;
      }
      case EventKind::ZoomIn:
        ++zooms;
        break;
      case EventKind::ScrollDown:
      case EventKind::Resize:
      case EventKind::Pagination:
        ++scrolls;
        break;
    }
    if (e.screen_size) {
      screen_mp = std::max(screen_mp, static_cast<double>(e.screen_size->width) *
                                          static_cast<double>(e.screen_size->height) / 1e6);
    }
  }

  const std::size_t nq = query_events.size();
  const double nqd = static_cast<double>(nq);
  const double ncd = static_cast<double>(clicks.size());

  // Query effort.
  std::vector<double> lengths, chars;
  for (std::size_t q = 0; q < nq; ++q) {
    lengths.push_back(static_cast<double>(terms[q].size()));
    chars.push_back(static_cast<double>(norm_queries[q].size()));
  }
  fv["num_queries"] = nqd;
  fv["num_unique_queries"] =
      static_cast<double>(std::set<std::string>(norm_queries.begin(), norm_queries.end()).size());
  fv["avg_terms_per_query"] = mean(lengths);
  fv["avg_chars_per_query"] = mean(chars);
  fv["pct_manual_queries"] = ratio(static_cast<double>(manual), nqd);
  fv["pct_suggested_queries"] = ratio(static_cast<double>(suggested), nqd);
  if (nq > 0) {
    // First occurrence of the maximum term count, as rank / number of queries.
    const auto longest = std::max_element(lengths.begin(), lengths.end()) - lengths.begin();
    fv["longest_query_position"] = static_cast<double>(longest + 1) / nqd;
  }

  // Click effort.
  std::vector<std::size_t> clicks_per_query(nq, 0);
  double sat = 0, images = 0, ads = 0, bookmarks = 0;
  for (const auto& c : clicks) {
    if (c.query >= 0) ++clicks_per_query[static_cast<std::size_t>(c.query)];
    if (c.sat) sat += 1;
    const auto& e = s.events[c.event_index];
    if (e.result_kind == ResultKind::Image) images += 1;
    if (e.result_kind == ResultKind::Ad) ads += 1;
    if (e.kind == EventKind::BookmarkClick || e.result_kind == ResultKind::Bookmark) bookmarks += 1;
  }
  std::size_t no_click = 0, run = 0, max_run = 0;
  std::vector<double> runs;
  for (std::size_t q = 0; q < nq; ++q) {
    if (clicks_per_query[q] == 0) {
      ++no_click;
      ++run;
    } else if (run > 0) {
      runs.push_back(static_cast<double>(run));
      max_run = std::max(max_run, run);
      run = 0;
    }
  }
  if (run > 0) {
    runs.push_back(static_cast<double>(run));
    max_run = std::max(max_run, run);
  }
  auto clicks_at = [&](std::size_t a, std::size_t b) {
    double n = 0;
    for (std::size_t q = a; q <= b && q < nq; ++q) n += static_cast<double>(clicks_per_query[q]);
    return n;
  };
  fv["total_clicks"] = ncd;
  fv["avg_clicks_per_query"] = ratio(ncd, nqd);
  fv["total_sat_clicks"] = sat;
  fv["avg_sat_clicks_per_query"] = ratio(sat, nqd);
  fv["pct_queries_without_clicks"] = ratio(static_cast<double>(no_click), nqd);
  fv["max_adjacent_queries_without_clicks"] = static_cast<double>(max_run);
  fv["avg_adjacent_queries_without_clicks"] = mean(runs);
  fv["total_image_clicks"] = images;
  fv["avg_image_clicks_per_query"] = ratio(images, nqd);
  fv["total_ad_clicks"] = ads;
  fv["avg_ad_clicks_per_query"] = ratio(ads, nqd);
  fv["total_bookmark_clicks"] = bookmarks;
  fv["avg_bookmark_clicks_per_query"] = ratio(bookmarks, nqd);
  fv["num_events"] = nqd + ncd;
  fv["clicks_first_two_queries"] = clicks_at(0, 1);
  fv["clicks_third_fourth_queries"] = clicks_at(2, 3);
  fv["clicks_fifth_sixth_queries"] = clicks_at(4, 5);
  for (auto it = s.events.rbegin(); it != s.events.rend(); ++it) {
    if (it->kind == EventKind::Query) break;
    if (it->is_click()) {
      fv["ends_with_click"] = 1.0;
      break;
    }
  }

  // Read effort.
  double total_dwell = 0;
  std::vector<double> dwell_excl_last;
  std::optional<double> first_sat;
  const double start = seconds(s.events.front().timestamp);
  for (const auto& c : clicks) {
    total_dwell += c.dwell;
    if (nq == 0 || c.query < static_cast<int>(nq) - 1) dwell_excl_last.push_back(c.dwell);
    if (c.sat && !first_sat) first_sat = seconds(s.events[c.event_index].timestamp) - start;
  }
  const double session_end = seconds(s.events.back().timestamp) + cfg.default_dwell_s;
  std::vector<double> serp_times;
  for (std::size_t q = 0; q < nq; ++q) {
    const double begin = seconds(s.events[query_events[q]].timestamp);
    const double end = q + 1 < nq ? seconds(s.events[query_events[q + 1]].timestamp) : session_end;
    serp_times.push_back(std::max(0.0, end - begin));
  }
  std::vector<double> serp_excl_last(serp_times.begin(),
                                     serp_times.end() - (serp_times.empty() ? 0 : 1));
  fv["total_dwell_time"] = total_dwell;
  fv["avg_image_impressions_per_serp"] = ratio(image_impressions, nqd);
  fv["total_zoom_ins"] = static_cast<double>(zooms);
  fv["log_avg_dwell_per_click"] = std::log1p(ratio(total_dwell, ncd));
  fv["log_avg_dwell_per_click_excl_last_query"] = std::log1p(mean(dwell_excl_last));
  fv["log_time_to_first_sat_click"] = std::log1p(first_sat.value_or(0.0));
  fv["log_avg_time_per_serp"] = std::log1p(mean(serp_times));
  fv["log_avg_time_per_serp_excl_last_query"] = std::log1p(mean(serp_excl_last));

  // Scroll effort.
  fv["screen_size"] = screen_mp;
  fv["total_scrolls"] = static_cast<double>(scrolls);
  fv["avg_scrolls_per_query"] = ratio(static_cast<double>(scrolls), nqd);

  // Reformulation effort.
  if (nq >= 2) {
    std::vector<double> to_first, pairwise, edits, added, removed, retained, substituted;
    double generations = 0, specifications = 0;
    for (std::size_t i = 1; i < nq; ++i) {
      const auto& qi = s.events[query_events[i]].query_text.value();
      to_first.push_back(text::query_cosine(qi, *s.events[query_events[0]].query_text));
      for (std::size_t j = 0; j < i; ++j) {
        pairwise.push_back(text::query_cosine(qi, *s.events[query_events[j]].query_text));
      }
      edits.push_back(static_cast<double>(text::edit_distance(norm_queries[i - 1], norm_queries[i])));
      const auto d = term_diff(terms[i - 1], terms[i]);
      added.push_back(d.added);
      removed.push_back(d.removed);
      retained.push_back(d.retained);
      substituted.push_back(std::min(d.added, d.removed));
      if (d.removed > 0 && d.added == 0) generations += 1;
      if (d.added > 0 && d.removed == 0) specifications += 1;
    }
    fv["avg_cosine_to_first_query"] = mean(to_first);
    fv["avg_pairwise_query_cosine"] = mean(pairwise);
    fv["avg_adjacent_edit_distance"] = mean(edits);
    fv["num_query_generations"] = generations;
    fv["num_query_specifications"] = specifications;
    fv["query_length_std"] = sample_std(lengths);
    fv["avg_terms_retained"] = mean(retained);
    fv["avg_terms_added"] = mean(added);
    fv["avg_terms_deleted"] = mean(removed);
    fv["avg_terms_substituted"] = mean(substituted);
  }
  if (nq > 0) fv["first_query_length_diff"] = lengths.front() - mean(lengths);

  // Diversify effort.
  std::set<std::string> urls, domains;
  for (const auto& c : clicks) {
    const auto& url = s.events[c.event_index].clicked_url.value_or("");
    urls.insert(url);
    domains.insert(text::url_domain(url));
  }
  const auto labels = tax.click_labels(s);
  fv["pct_unique_urls"] = ratio(static_cast<double>(urls.size()), ncd);
  fv["pct_unique_domains"] = ratio(static_cast<double>(domains.size()), ncd);
  fv["num_unique_clicks"] = static_cast<double>(urls.size());
  fv["num_unique_topics"] =
      static_cast<double>(std::set<std::string>(labels.begin(), labels.end()).size());
  fv["topic_entropy"] = topic_entropy(labels);

  // Rarity effort.
  std::vector<double> freq, qsat, qclicks, entropy, fastback, url_freq;
  for (const auto& q : norm_queries) {
    const auto rec = pop.query(q);
    freq.push_back(rec.frequency);
    qsat.push_back(rec.avg_sat_clicks);
    qclicks.push_back(rec.avg_clicks);
    entropy.push_back(rec.click_entropy);
    fastback.push_back(rec.fastback_count);
  }
  for (const auto& c : clicks) {
    url_freq.push_back(pop.url(s.events[c.event_index].clicked_url.value_or("")).click_frequency);
  }
  fv["log_avg_query_frequency"] = std::log1p(mean(freq));
  fv["log_avg_query_sat_clicks"] = std::log1p(mean(qsat));
  fv["log_avg_query_clicks"] = std::log1p(mean(qclicks));
  fv["avg_query_click_entropy"] = mean(entropy);
  fv["log_avg_query_fastback_clicks"] = std::log1p(mean(fastback));
  fv["log_avg_url_click_frequency"] = std::log1p(mean(url_freq));

  return fv;
}

std::vector<FeatureRow> extract_all(const std::vector<Session>& sessions,
                                    const PopularityTable& pop, const Taxonomy& tax,
                                    const ExtractConfig& cfg, unsigned jobs) {
  std::vector<FeatureRow> rows(sessions.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t i = begin; i < sessions.size(); i += stride) {
      const auto& s = sessions[i];
      rows[i] = FeatureRow{s.session_id, extract(s, pop, tax, cfg), s.state, s.label};
    }
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(work, j, jobs);
  }
  return rows;
}

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<FeatureRow>& rows) {
  out << "session_id";
  for (const auto& f : feature_dictionary()) out << ',' << f.name;
  out << ",topic,state,label\n";
  for (const auto& r : rows) {
    out << quote_csv(r.session_id);
    for (double v : r.fv.values) out << ',' << format_real(v);
    out << ',' << quote_csv(r.fv.topic) << ',' << to_string(r.state) << ',' << to_string(r.label)
        << '\n';
  }
}

std::vector<FeatureRow> read_csv(std::istream& in) {
  if (!in) throw DataError("feature matrix stream is not readable");
  std::string line;
  if (!std::getline(in, line)) throw FormatError("feature matrix is empty");
  const auto header = split_csv(line);
  const std::size_t nf = feature_count();
  if (header.size() != nf + 4 || header.front() != "session_id") {
    throw FormatError("feature matrix header does not match the feature dictionary");
  }
  for (std::size_t i = 0; i < nf; ++i) {
    if (header[i + 1] != feature_dictionary()[i].name) {
      throw FormatError("feature matrix column " + std::to_string(i + 1) + " is '" + header[i + 1] +
                        "', expected '" + std::string(feature_dictionary()[i].name) + "'");
    }
  }
  std::vector<FeatureRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw FormatError("feature matrix line " + std::to_string(lineno) + ": wrong column count");
    }
    FeatureRow r;
    r.session_id = cells[0];
    for (std::size_t i = 0; i < nf; ++i) {
      const auto& cell = cells[i + 1];
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(v)) {
        throw FormatError("feature matrix line " + std::to_string(lineno) + ": bad value '" + cell +
                          "'");
      }
      r.fv.values[i] = v;
    }
    r.fv.topic = cells[nf + 1];
    r.state = parse_state(cells[nf + 2]);
    r.label = parse_label(cells[nf + 3]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace struggle::features
