#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "struggle/features.hpp"
#include "struggle/ingest.hpp"
#include "struggle/learn.hpp"
#include "struggle/synth.hpp"
#include "struggle/taxonomy.hpp"

namespace struggle::cli {

struct PipelineConfig {
  ingest::SegmentConfig segment;
  features::ExtractConfig extract;
  unsigned jobs = 1;
};

// Log -> sessions -> topics/states -> labels from the truth map -> features.
// Sessions without a truth entry stay unlabeled.
std::vector<features::FeatureRow> rows_from_log(std::istream& log,
                                                const std::map<std::string, synth::Truth>& truth,
                                                const PopularityTable& pop,
                                                const Taxonomy& tax, const PipelineConfig& cfg);

// Same pipeline fed straight from the generator.
std::vector<features::FeatureRow> simulate_rows(const synth::SimConfig& sim, const Taxonomy& tax,
                                                const PipelineConfig& cfg = {});

struct Comparison {
  learn::EvalReport baseline, fmns, fm;
};

Comparison compare(const std::vector<features::FeatureRow>& rows, learn::EvalConfig cfg);

void print_table(std::ostream& out, const Comparison& c, double alpha);
void write_records(std::ostream& out, const Comparison& c, const learn::EvalConfig& cfg);

// Entry point. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace struggle::cli
