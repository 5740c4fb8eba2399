#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "struggle/model.hpp"
#include "struggle/taxonomy.hpp"

namespace struggle::features {

struct ExtractConfig {
  double sat_threshold_s = 30.0;
  // Dwell assigned to a click that is the last event of its session; also
  // the tail added after a session's last event when timing result pages.
  double default_dwell_s = 30.0;
};

// Seconds from the event at `index` to the next event of the session, or the
// configured default when it is the last event.
double dwell_time(const Session& s, std::size_t index, const ExtractConfig& cfg = {});

// dwell_time >= threshold (inclusive).
bool sat_click(const Session& s, std::size_t index, double threshold_s);

double topic_entropy(const std::vector<std::string>& labels);
double topic_entropy(const Session& s, const Taxonomy& tax);

FeatureVector extract(const Session& s, const PopularityTable& pop, const Taxonomy& tax,
                      const ExtractConfig& cfg = {});

// One row of a feature matrix.
struct FeatureRow {
  std::string session_id;
  FeatureVector fv;
  State state = State::Unassigned;
  Label label = Label::Unlabeled;
  bool operator==(const FeatureRow&) const = default;
};

std::vector<FeatureRow> extract_all(const std::vector<Session>& sessions,
                                    const PopularityTable& pop, const Taxonomy& tax,
                                    const ExtractConfig& cfg = {}, unsigned jobs = 1);

// CSV: session_id, the dictionary columns in order, topic, state, label.
// Reals are written with 17 significant digits so a read reproduces them.
void write_csv(std::ostream& out, const std::vector<FeatureRow>& rows);
std::vector<FeatureRow> read_csv(std::istream& in);

}  // namespace struggle::features
