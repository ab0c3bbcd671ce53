#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citegcn/corpus.hpp"
#include "citegcn/graph.hpp"
#include "citegcn/matrix.hpp"
#include "citegcn/topics.hpp"

namespace citegcn::features {

// Citations accumulated by the snapshot cutoff (the full citer list).
std::size_t citations_at_cutoff(const corpus::CorpusSnapshot& snapshot,
                                corpus::PaperId id);

// Mean cutoff citation count over a paper's references. References outside
// the snapshot contribute 0 but stay in the denominator; no references -> 0.
double citation_quality(const corpus::CorpusSnapshot& snapshot,
                        corpus::PaperId id);

// popularity(z) = (1/|D|) sum_d p(z|d) * C_d over the given corpus ids,
// which the caller restricts to training rows.
std::vector<double> topic_popularity(const topics::DocTopics& doc_topics,
                                     const std::map<corpus::PaperId, double>& targets,
                                     const std::vector<corpus::PaperId>& corpus_ids);

// (1/K) sum_z popularity(z) * p(z|d).
double paper_popularity(const std::vector<double>& mixture,
                        const std::vector<double>& popularity);

// (1/K) sum_z -p(z|d) ln p(z|d); zero entries contribute 0.
double paper_diversity(const std::vector<double>& mixture);

// Largest h such that at least h entries are >= h.
std::size_t h_index(const std::vector<std::size_t>& counts);

struct AuthorFeatures {
  double first_author_paper_count = 0;
  double highest_h_index = 0;
  double total_h_index = 0;
  double average_h_index = 0;
  double first_author_h_index = 0;
  double average_citations = 0;
  double first_author_citations = 0;
  double highest_citations = 0;
  double average_paper_count = 0;
  double papers_by_highest_h_author = 0;
  double coauthor_count = 0;
};

// Aggregates over the paper's deduplicated author list; the paper itself
// counts toward its authors' paper and citation tallies.
AuthorFeatures author_features(const corpus::CorpusSnapshot& snapshot,
                               corpus::PaperId id);

using VenueRanks = std::map<std::string, double>;

struct VenueFeatures {
  double avg_citations = 0;
  double h_index = 0;
  double paper_count = 0;
  double is_journal = 0;
  double is_conference = 0;
  double rank = 0;
  double rank_missing = 1;
};

VenueFeatures venue_features(const corpus::CorpusSnapshot& snapshot,
                             corpus::PaperId id, const VenueRanks* ranks);

// CSV rows venue_name,rank (header optional).
VenueRanks read_venue_ranks_csv(std::istream& in);

struct FeatureBlock {
  std::vector<std::string> columns;
  std::map<corpus::PaperId, std::vector<double>> rows;
};

FeatureBlock article_block(const corpus::CorpusSnapshot& snapshot,
                           const topics::DocTopics& doc_topics,
                           const std::vector<double>& popularity,
                           const std::vector<corpus::PaperId>& node_ids);
FeatureBlock author_block(const corpus::CorpusSnapshot& snapshot,
                          const std::vector<corpus::PaperId>& node_ids);
FeatureBlock venue_block(const corpus::CorpusSnapshot& snapshot,
                         const std::vector<corpus::PaperId>& node_ids,
                         const VenueRanks* ranks);
// Row order is the graph's node order; in-graph in-degree is times cited,
// out-degree is references kept within the graph.
FeatureBlock network_block(const graph::CitationGraph& graph);

struct FeatureMatrix {
  std::vector<corpus::PaperId> node_ids;
  std::vector<std::string> columns;
  Matrix values;
  // Per-column (min, max) captured from training rows by normalize().
  std::vector<std::pair<double, double>> norm_stats;
  bool normalized = false;

  std::size_t column_index(const std::string& name) const;
};

// Concatenates blocks in the given order; every block must cover every node.
FeatureMatrix assemble(const std::vector<corpus::PaperId>& node_ids,
                       const std::vector<FeatureBlock>& blocks);

// All four families in the documented column order, rows following the
// graph's node order.
FeatureMatrix compute_features(const corpus::CorpusSnapshot& snapshot,
                               const graph::CitationGraph& graph,
                               const topics::DocTopics& doc_topics,
                               const std::vector<double>& popularity,
                               const VenueRanks* ranks = nullptr);

// Min-max scaling per column with statistics from train_rows only; constant
// columns map to 0; out-of-range rows are clamped to [-1, 2].
void normalize(FeatureMatrix& matrix, const std::vector<std::size_t>& train_rows);

void write_features_csv(const FeatureMatrix& matrix, std::ostream& out);
FeatureMatrix read_features_csv(std::istream& in);
std::string norm_stats_json(const FeatureMatrix& matrix);

}  // namespace citegcn::features
