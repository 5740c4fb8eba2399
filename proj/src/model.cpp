#include "struggle/model.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace struggle {

namespace {

using G = FeatureGroup;

constexpr FeatureSpec kDictionary[] = {
    // query effort
    {"num_queries", G::QueryEffort},
    {"num_unique_queries", G::QueryEffort},
    {"avg_terms_per_query", G::QueryEffort},
    {"avg_chars_per_query", G::QueryEffort},
    {"pct_manual_queries", G::QueryEffort},
    {"pct_suggested_queries", G::QueryEffort},
    {"longest_query_position", G::QueryEffort},
    // click effort
    {"total_clicks", G::ClickEffort},
    {"avg_clicks_per_query", G::ClickEffort},
    {"total_sat_clicks", G::ClickEffort},
    {"avg_sat_clicks_per_query", G::ClickEffort},
    {"pct_queries_without_clicks", G::ClickEffort},
    {"max_adjacent_queries_without_clicks", G::ClickEffort},
    {"avg_adjacent_queries_without_clicks", G::ClickEffort},
    {"total_image_clicks", G::ClickEffort},
    {"avg_image_clicks_per_query", G::ClickEffort},
    {"total_ad_clicks", G::ClickEffort},
    {"avg_ad_clicks_per_query", G::ClickEffort},
    {"total_bookmark_clicks", G::ClickEffort},
    {"avg_bookmark_clicks_per_query", G::ClickEffort},
    {"num_events", G::ClickEffort},
    {"clicks_first_two_queries", G::ClickEffort},
    {"clicks_third_fourth_queries", G::ClickEffort},
    {"clicks_fifth_sixth_queries", G::ClickEffort},
    {"ends_with_click", G::ClickEffort},
    // read effort
    {"total_dwell_time", G::ReadEffort},
    {"avg_image_impressions_per_serp", G::ReadEffort},
    {"total_zoom_ins", G::ReadEffort},
    {"log_avg_dwell_per_click", G::ReadEffort},
    {"log_avg_dwell_per_click_excl_last_query", G::ReadEffort},
    {"log_time_to_first_sat_click", G::ReadEffort},
    {"log_avg_time_per_serp", G::ReadEffort},
    {"log_avg_time_per_serp_excl_last_query", G::ReadEffort},
    // scroll effort
    {"screen_size", G::ScrollEffort},
    {"total_scrolls", G::ScrollEffort},
    {"avg_scrolls_per_query", G::ScrollEffort},
    // reformulation effort
    {"avg_cosine_to_first_query", G::ReformEffort},
    {"avg_pairwise_query_cosine", G::ReformEffort},
    {"avg_adjacent_edit_distance", G::ReformEffort},
    {"num_query_generations", G::ReformEffort},
    {"num_query_specifications", G::ReformEffort},
    {"first_query_length_diff", G::ReformEffort},
    {"query_length_std", G::ReformEffort},
    {"avg_terms_retained", G::ReformEffort},
    {"avg_terms_added", G::ReformEffort},
    {"avg_terms_deleted", G::ReformEffort},
    {"avg_terms_substituted", G::ReformEffort},
    // diversify effort
    {"pct_unique_urls", G::DiversifyEffort},
    {"pct_unique_domains", G::DiversifyEffort},
    {"num_unique_clicks", G::DiversifyEffort},
    {"num_unique_topics", G::DiversifyEffort},
    {"topic_entropy", G::DiversifyEffort},
    // rarity effort
    {"log_avg_query_frequency", G::RarityEffort},
    {"log_avg_query_sat_clicks", G::RarityEffort},
    {"log_avg_query_clicks", G::RarityEffort},
    {"avg_query_click_entropy", G::RarityEffort},
    {"log_avg_query_fastback_clicks", G::RarityEffort},
    {"log_avg_url_click_frequency", G::RarityEffort},
};

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::pair<std::string_view, E> (&table)[N],
             std::string_view what) {
  for (const auto& [name, value] : table) {
    if (name == s) return value;
  }
  throw FormatError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view enum_name(E v, const std::pair<std::string_view, E> (&table)[N]) {
  for (const auto& [name, value] : table) {
    if (value == v) return name;
  }
  return "?";
}

constexpr std::pair<std::string_view, EventKind> kEventKinds[] = {
    {"query", EventKind::Query},          {"click", EventKind::Click},
    {"scroll", EventKind::ScrollDown},    {"resize", EventKind::Resize},
    {"zoom", EventKind::ZoomIn},          {"bookmark", EventKind::BookmarkClick},
    {"page", EventKind::Pagination},
};
constexpr std::pair<std::string_view, QuerySource> kSources[] = {
    {"manual", QuerySource::Manual}, {"suggested", QuerySource::Suggested}};
constexpr std::pair<std::string_view, ResultKind> kResultKinds[] = {
    {"web", ResultKind::Web},
    {"image", ResultKind::Image},
    {"ad", ResultKind::Ad},
    {"bookmark", ResultKind::Bookmark}};
constexpr std::pair<std::string_view, Platform> kPlatforms[] = {{"mobile", Platform::Mobile},
                                                                {"pc", Platform::PC}};
constexpr std::pair<std::string_view, Label> kLabels[] = {{"struggle", Label::Struggle},
                                                          {"nonstruggle", Label::NonStruggle},
                                                          {"unlabeled", Label::Unlabeled}};
constexpr std::pair<std::string_view, State> kStates[] = {{"telic", State::Telic},
                                                          {"paratelic", State::Paratelic},
                                                          {"unassigned", State::Unassigned}};
constexpr std::pair<std::string_view, FeatureGroup> kGroups[] = {
    {"QueryEffort", G::QueryEffort},         {"ClickEffort", G::ClickEffort},
    {"ReadEffort", G::ReadEffort},           {"ScrollEffort", G::ScrollEffort},
    {"ReformEffort", G::ReformEffort},       {"DiversifyEffort", G::DiversifyEffort},
    {"RarityEffort", G::RarityEffort},
};

}  // namespace

std::span<const FeatureSpec> feature_dictionary() { return kDictionary; }

std::size_t feature_count() { return std::size(kDictionary); }

std::size_t feature_index(std::string_view name) {
  static const auto index = [] {
    std::unordered_map<std::string_view, std::size_t> m;
    for (std::size_t i = 0; i < std::size(kDictionary); ++i) m.emplace(kDictionary[i].name, i);
    return m;
  }();
  auto it = index.find(name);
  if (it == index.end()) throw std::out_of_range("unknown feature '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::size_t> features_in_group(FeatureGroup g) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::size(kDictionary); ++i) {
    if (kDictionary[i].group == g) out.push_back(i);
  }
  return out;
}

void validate(const RawEvent& e) {
  if (e.timestamp < 0) throw FormatError("negative timestamp");
  if (e.kind == EventKind::Query && (!e.query_text || !e.query_source)) {
    throw FormatError("query event without query text or source");
  }
  if (e.is_click() && (!e.clicked_url || !e.result_kind)) {
    throw FormatError("click event without url or result kind");
  }
  if (e.serp_image_impressions && *e.serp_image_impressions < 0) {
    throw FormatError("negative image impression count");
  }
}

void validate(const Session& s) {
  if (s.events.empty()) throw DataError("session " + s.session_id + " has no events");
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    if (s.events[i].user_id != s.user_id) {
      throw DataError("session " + s.session_id + " mixes users");
    }
    if (i > 0 && s.events[i].timestamp < s.events[i - 1].timestamp) {
      throw DataError("session " + s.session_id + " events out of order");
    }
  }
}

void PopularityTable::set_query(std::string query, QueryPopularity rec) {
  if (rec.frequency < 0 || rec.avg_sat_clicks < 0 || rec.avg_clicks < 0 || rec.click_entropy < 0 ||
      rec.fastback_count < 0) {
    throw DataError("negative popularity statistic for query '" + query + "'");
  }
  queries_[normalize_query(query)] = rec;
}

void PopularityTable::set_url(std::string url, UrlPopularity rec) {
  if (rec.click_frequency < 0) throw DataError("negative click frequency for '" + url + "'");
  urls_[std::move(url)] = rec;
}

QueryPopularity PopularityTable::query(std::string_view q) const {
  auto it = queries_.find(normalize_query(q));
  return it == queries_.end() ? QueryPopularity{} : it->second;
}

UrlPopularity PopularityTable::url(std::string_view u) const {
  auto it = urls_.find(std::string(u));
  return it == urls_.end() ? UrlPopularity{} : it->second;
}

std::string normalize_query(std::string_view q) {
  std::string out;
  bool pending_space = false;
  for (char c : q) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string_view to_string(EventKind k) { return enum_name(k, kEventKinds); }
std::string_view to_string(QuerySource s) { return enum_name(s, kSources); }
std::string_view to_string(ResultKind k) { return enum_name(k, kResultKinds); }
std::string_view to_string(Platform p) { return enum_name(p, kPlatforms); }
std::string_view to_string(Label l) { return enum_name(l, kLabels); }
std::string_view to_string(State s) { return enum_name(s, kStates); }
std::string_view to_string(FeatureGroup g) { return enum_name(g, kGroups); }

EventKind parse_event_kind(std::string_view s) { return parse_enum(s, kEventKinds, "event kind"); }
QuerySource parse_query_source(std::string_view s) {
  return parse_enum(s, kSources, "query source");
}
ResultKind parse_result_kind(std::string_view s) {
  return parse_enum(s, kResultKinds, "result kind");
}
Platform parse_platform(std::string_view s) { return parse_enum(s, kPlatforms, "platform"); }
Label parse_label(std::string_view s) { return parse_enum(s, kLabels, "label"); }
State parse_state(std::string_view s) { return parse_enum(s, kStates, "state"); }
FeatureGroup parse_group(std::string_view s) { return parse_enum(s, kGroups, "feature group"); }

}  // namespace struggle
