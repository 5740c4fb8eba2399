#pragma once

#include <istream>
#include <ostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "struggle/model.hpp"
#include "struggle/text.hpp"

namespace struggle {

struct TaxonomyCategory {
  std::string name;
  std::vector<std::string> keywords;
  State state = State::Telic;
};

// Topic taxonomy with a tf-idf index over the category documents (name
// tokens plus keywords). Read-only after construction.
//
// File format, one category per line:
//
//   <telic|paratelic> TAB <category name> TAB <keyword>,<keyword>,...
//
// Blank lines and lines starting with '#' are ignored.
class Taxonomy {
 public:
  // Throws ConfigError on duplicate names, empty keyword lists, or an empty
  // category list.
  explicit Taxonomy(std::vector<TaxonomyCategory> categories);

  static Taxonomy parse(std::istream& in);
  static Taxonomy load(const std::string& path);
  // The ~12-category fixture shipped with the project.
  static Taxonomy builtin();

  const std::vector<TaxonomyCategory>& categories() const { return categories_; }
  // Category names in lexicographic order.
  std::vector<std::string> names() const;

  // tf-idf cosine between the URL's alphanumeric tokens and the category
  // document. 0 for an empty token set.
  double score_url(std::string_view url_text, std::size_t category) const;
  double score_url(std::string_view url_text, std::string_view category_name) const;

  // Argmax-score category for a URL; ties go to the lexicographically
  // smallest name. nullopt when every score is 0.
  std::optional<std::string> label_url(std::string_view url_text) const;

  // Most frequent URL label in the session (ties: smallest name); nullopt when
  // the session has no labeled clicks.
  std::optional<std::string> assign_topic(const Session& s) const;

  // Per-click labels in event order; unlabeled clicks are omitted.
  std::vector<std::string> click_labels(const Session& s) const;

  State assign_state(const std::optional<std::string>& topic) const;

 private:
  double idf(const std::string& term) const;
  text::TermCounts weigh(const text::TermCounts& tf) const;

  std::vector<TaxonomyCategory> categories_;
  std::vector<text::TermCounts> docs_;  // tf-idf weighted
  text::TermCounts doc_freq_;
};

// Convenience: fills topic and state on every session.
void assign_topics_and_states(std::vector<Session>& sessions, const Taxonomy& tax);

// Writes the file format that Taxonomy::parse reads.
void write_taxonomy(std::ostream& out, const Taxonomy& tax);

}  // namespace struggle
