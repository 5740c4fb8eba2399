#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace struggle {

// Error families. The CLI maps UsageError to exit 1 and DataError (and its
// subclasses) to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FormatError : DataError {
  using DataError::DataError;
};
struct ConfigError : DataError {
  using DataError::DataError;
};

enum class EventKind { Query, Click, ScrollDown, Resize, ZoomIn, BookmarkClick, Pagination };
enum class QuerySource { Manual, Suggested };
enum class ResultKind { Web, Image, Ad, Bookmark };
enum class Platform { Mobile, PC };
enum class Label { Struggle, NonStruggle, Unlabeled };
enum class State { Telic, Paratelic, Unassigned };

struct ScreenSize {
  int width = 0;
  int height = 0;
  bool operator==(const ScreenSize&) const = default;
};

struct RawEvent {
  std::string user_id;
  std::int64_t timestamp = 0;  // ms since epoch
  EventKind kind = EventKind::Query;
  std::optional<std::string> query_text;
  std::optional<QuerySource> query_source;
  std::optional<std::string> clicked_url;
  std::optional<ResultKind> result_kind;
  std::optional<std::int64_t> serp_image_impressions;
  std::optional<ScreenSize> screen_size;
  std::optional<std::string> session_hint;  // pre-assigned session id ("sid")
  std::optional<Platform> platform;

  bool is_click() const { return kind == EventKind::Click || kind == EventKind::BookmarkClick; }
  bool operator==(const RawEvent&) const = default;
};

// Throws FormatError when the per-kind field invariants do not hold.
void validate(const RawEvent& e);

struct Session {
  std::string session_id;
  std::string user_id;
  Platform platform = Platform::PC;
  std::vector<RawEvent> events;
  Label label = Label::Unlabeled;
  std::optional<std::string> topic;
  State state = State::Unassigned;

  bool operator==(const Session&) const = default;
};

// Throws DataError when events are empty, unsorted, or span several users.
void validate(const Session& s);

enum class FeatureGroup {
  QueryEffort,
  ClickEffort,
  ReadEffort,
  ScrollEffort,
  ReformEffort,
  DiversifyEffort,
  RarityEffort,
};

inline constexpr std::array<FeatureGroup, 7> kAllGroups = {
    FeatureGroup::QueryEffort,  FeatureGroup::ClickEffort,     FeatureGroup::ReadEffort,
    FeatureGroup::ScrollEffort, FeatureGroup::ReformEffort,    FeatureGroup::DiversifyEffort,
    FeatureGroup::RarityEffort,
};

struct FeatureSpec {
  std::string_view name;
  FeatureGroup group;
};

// The feature dictionary. Order is the column order of every feature matrix
// this project reads or writes.
std::span<const FeatureSpec> feature_dictionary();
std::size_t feature_count();
// Index of a feature name in the dictionary; throws std::out_of_range.
std::size_t feature_index(std::string_view name);
std::vector<std::size_t> features_in_group(FeatureGroup g);

// Named effort features for one session. `values` is aligned with
// feature_dictionary().
struct FeatureVector {
  std::vector<double> values;
  std::string topic;

  FeatureVector() : values(feature_count(), 0.0) {}
  double operator[](std::string_view name) const { return values.at(feature_index(name)); }
  double& operator[](std::string_view name) { return values.at(feature_index(name)); }
  bool operator==(const FeatureVector&) const = default;
};

struct QueryPopularity {
  double frequency = 0;
  double avg_sat_clicks = 0;
  double avg_clicks = 0;
  double click_entropy = 0;
  double fastback_count = 0;  // average fast-back clicks per issuance
  bool operator==(const QueryPopularity&) const = default;
};

struct UrlPopularity {
  double click_frequency = 0;
  bool operator==(const UrlPopularity&) const = default;
};

// Population statistics keyed by normalized query text and by URL. Lookups of
// unseen keys return all-zero records.
class PopularityTable {
 public:
  void set_query(std::string query, QueryPopularity rec);
  void set_url(std::string url, UrlPopularity rec);
  QueryPopularity query(std::string_view q) const;
  UrlPopularity url(std::string_view u) const;
  const std::map<std::string, QueryPopularity>& queries() const { return queries_; }
  const std::map<std::string, UrlPopularity>& urls() const { return urls_; }
  bool operator==(const PopularityTable&) const = default;

 private:
  std::map<std::string, QueryPopularity> queries_;
  std::map<std::string, UrlPopularity> urls_;
};

// Lowercased, whitespace-collapsed form used as the popularity lookup key.
std::string normalize_query(std::string_view q);

// Name <-> enum conversions used by every text format. Parsers throw
// FormatError on unknown names.
std::string_view to_string(EventKind k);
std::string_view to_string(QuerySource s);
std::string_view to_string(ResultKind k);
std::string_view to_string(Platform p);
std::string_view to_string(Label l);
std::string_view to_string(State s);
std::string_view to_string(FeatureGroup g);
EventKind parse_event_kind(std::string_view s);
QuerySource parse_query_source(std::string_view s);
ResultKind parse_result_kind(std::string_view s);
Platform parse_platform(std::string_view s);
Label parse_label(std::string_view s);
State parse_state(std::string_view s);
FeatureGroup parse_group(std::string_view s);

}  // namespace struggle
