#pragma once

// Synthetic bibliographic corpus generator with planted citation dynamics.
// Papers arrive year by year; references prefer highly cited and same-topic
// papers; continuing the process past the snapshot year yields exact
// ground-truth future citation counts.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "citegcn/corpus.hpp"

namespace citegcn::synth {

struct SynthConfig {
  std::size_t num_papers = 2000;   // total generated, extension years included
  std::size_t num_authors = 300;
  std::size_t num_venues = 20;
  std::size_t num_topics = 5;
  int start_year = 1990;
  int end_year = 2010;             // snapshot cutoff; later papers feed truth
  std::size_t delta_years = 5;     // horizon simulated past the cutoff
  double attachment_strength = 1.0;
  double same_topic_boost = 2.0;
  std::vector<double> topic_popularity;  // weights; empty means uniform
  double references_mean = 5.0;
  double noise = 0.1;              // shared-vocabulary word rate; target jitter
  bool planted_targets = false;    // nonlinear neighbor-average targets
  std::uint64_t seed = 0;
};

struct GroundTruth {
  corpus::PaperId id = 0;
  std::size_t topic = 0;
  std::size_t future_citations = 0;  // gained in (end_year, end_year + delta]
  double planted_target = 0.0;       // nonzero only in planted mode
};

struct SynthResult {
  std::vector<corpus::PaperRecord> records;  // all years, extension included
  std::vector<GroundTruth> truth;            // one row per paper <= end_year
  int cutoff_year = 0;
};

SynthResult generate(const SynthConfig& config);

// Corpus goes out as AMiner v1 text so the real parser is exercised.
void write_truth_csv(const SynthResult& result, std::ostream& out);
std::vector<GroundTruth> read_truth_csv(std::istream& in);

}  // namespace citegcn::synth
