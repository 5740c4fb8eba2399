#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <vector>

#include "struggle/features.hpp"
#include "struggle/model.hpp"

namespace struggle::modulation {

struct FeatureMoments {
  double mu_telic = 0;
  double sigma_telic = 0;
  double mu_paratelic = 0;
  double sigma_paratelic = 0;
  bool operator==(const FeatureMoments&) const = default;
};

// Per-feature state moments for every feature of the selected groups, keyed
// by dictionary index.
struct ModulationParams {
  std::set<FeatureGroup> selected_groups;
  std::map<std::size_t, FeatureMoments> moments;
  bool operator==(const ModulationParams&) const = default;
};

// Sample means and (n - 1) standard deviations over telic and paratelic rows
// for every feature of the selected groups. Rows are expected to be
// normalized. Throws DataError when a state has fewer than 2 rows.
ModulationParams fit(const std::vector<features::FeatureRow>& rows,
                     const std::set<FeatureGroup>& selected_groups);

// Maps a paratelic value onto the telic distribution:
//   x' = (sigma_t / sigma_p) x + mu_t - (sigma_t / sigma_p) mu_p
// With sigma_p == 0 this falls back to x - mu_p + mu_t.
double transform_value(double x, const FeatureMoments& m);

// Paratelic rows get every parameterized feature transformed; telic and
// unassigned rows pass through unchanged.
FeatureVector apply(const FeatureVector& fv, State state, const ModulationParams& params);
void apply_all(std::vector<features::FeatureRow>& rows, const ModulationParams& params);

// Text form: a "groups" header line, then one line per feature
//   <feature> TAB mu_t TAB sigma_t TAB mu_p TAB sigma_p
// with 17 significant digits.
void write_params(std::ostream& out, const ModulationParams& params);
ModulationParams read_params(std::istream& in);

}  // namespace struggle::modulation
