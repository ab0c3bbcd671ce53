#include "citegcn/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "citegcn/errors.hpp"
#include "citegcn/format.hpp"
#include "json.hpp"

namespace citegcn::features {

std::size_t citations_at_cutoff(const corpus::CorpusSnapshot& snapshot,
                                corpus::PaperId id) {
  auto it = snapshot.citers.find(id);
  if (it == snapshot.citers.end())
    throw DataError("unknown paper id " + std::to_string(id));
  return it->second.size();
}

double citation_quality(const corpus::CorpusSnapshot& snapshot,
                        corpus::PaperId id) {
  const auto& rec = snapshot.papers.at(id);
  if (rec.references.empty()) return 0.0;
  double sum = 0.0;
  for (corpus::PaperId ref : rec.references) {
    auto it = snapshot.citers.find(ref);
    if (it != snapshot.citers.end()) sum += static_cast<double>(it->second.size());
  }
  return sum / static_cast<double>(rec.references.size());
}

std::vector<double> topic_popularity(const topics::DocTopics& doc_topics,
                                     const std::map<corpus::PaperId, double>& targets,
                                     const std::vector<corpus::PaperId>& corpus_ids) {
  if (corpus_ids.empty()) throw DataError("topic_popularity: empty corpus");
  auto first = doc_topics.find(corpus_ids.front());
  if (first == doc_topics.end())
    throw DataError("topic_popularity: missing mixture for paper " +
                    std::to_string(corpus_ids.front()));
  const std::size_t k = first->second.size();
  std::vector<double> popularity(k, 0.0);
  for (corpus::PaperId id : corpus_ids) {
    auto mix = doc_topics.find(id);
    if (mix == doc_topics.end())
      throw DataError("topic_popularity: missing mixture for paper " +
                      std::to_string(id));
    auto target = targets.find(id);
    const double c = target == targets.end() ? 0.0 : target->second;
    for (std::size_t z = 0; z < k; ++z) popularity[z] += mix->second[z] * c;
  }
  for (double& p : popularity) p /= static_cast<double>(corpus_ids.size());
  return popularity;
}

double paper_popularity(const std::vector<double>& mixture,
                        const std::vector<double>& popularity) {
  if (mixture.size() != popularity.size())
    throw DataError("paper_popularity: mixture/popularity length mismatch");
  if (mixture.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t z = 0; z < mixture.size(); ++z)
    sum += popularity[z] * mixture[z];
  return sum / static_cast<double>(mixture.size());
}

double paper_diversity(const std::vector<double>& mixture) {
  if (mixture.empty()) return 0.0;
  double entropy = 0.0;
  for (double p : mixture)
    if (p > 0.0) entropy -= p * std::log(p);
  return entropy / static_cast<double>(mixture.size());
}

std::size_t h_index(const std::vector<std::size_t>& counts) {
  std::vector<std::size_t> sorted = counts;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::size_t h = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (sorted[i] >= i + 1) h = i + 1;
  return h;
}

namespace {

std::vector<std::string> dedup_authors(const std::vector<std::string>& authors) {
  std::vector<std::string> uniq;
  for (const auto& a : authors)
    if (std::find(uniq.begin(), uniq.end(), a) == uniq.end()) uniq.push_back(a);
  return uniq;
}

struct AuthorStats {
  double papers = 0;
  double citations = 0;
  std::size_t h = 0;
};

AuthorStats author_stats(const corpus::CorpusSnapshot& snapshot,
                         const std::string& author) {
  AuthorStats stats;
  auto it = snapshot.author_index.find(author);
  if (it == snapshot.author_index.end()) return stats;
  std::vector<std::size_t> counts;
  corpus::PaperId prev = -1;
  for (const auto& ref : it->second) {
    if (ref.paper_id == prev) continue;  // name repeated on one paper
    prev = ref.paper_id;
    const std::size_t c = citations_at_cutoff(snapshot, ref.paper_id);
    counts.push_back(c);
    stats.citations += static_cast<double>(c);
  }
  stats.papers = static_cast<double>(counts.size());
  stats.h = h_index(counts);
  return stats;
}

}  // namespace

AuthorFeatures author_features(const corpus::CorpusSnapshot& snapshot,
                               corpus::PaperId id) {
  const auto& rec = snapshot.papers.at(id);
  const auto authors = dedup_authors(rec.authors);
  if (authors.empty()) throw DataError("author_features: paper has no authors");

  AuthorFeatures f;
  f.coauthor_count = static_cast<double>(authors.size() - 1);

  double total_h = 0;
  double total_citations = 0;
  double total_papers = 0;
  std::size_t best_h = 0;
  double best_h_papers = 0;
  double best_citations = 0;
  for (std::size_t i = 0; i < authors.size(); ++i) {
    const AuthorStats stats = author_stats(snapshot, authors[i]);
    total_h += static_cast<double>(stats.h);
    total_citations += stats.citations;
    total_papers += stats.papers;
    best_citations = std::max(best_citations, stats.citations);
    if (i == 0) {
      f.first_author_paper_count = stats.papers;
      f.first_author_h_index = static_cast<double>(stats.h);
      f.first_author_citations = stats.citations;
      best_h = stats.h;
      best_h_papers = stats.papers;
    } else if (stats.h > best_h) {
      best_h = stats.h;
      best_h_papers = stats.papers;
    }
  }
  const double n = static_cast<double>(authors.size());
  f.highest_h_index = static_cast<double>(best_h);
  f.total_h_index = total_h;
  f.average_h_index = total_h / n;
  f.average_citations = total_citations / n;
  f.highest_citations = best_citations;
  f.average_paper_count = total_papers / n;
  f.papers_by_highest_h_author = best_h_papers;
  return f;
}

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains_any(const std::string& haystack,
                  const std::vector<std::string>& needles) {
  for (const auto& n : needles)
    if (haystack.find(n) != std::string::npos) return true;
  return false;
}

}  // namespace

VenueFeatures venue_features(const corpus::CorpusSnapshot& snapshot,
                             corpus::PaperId id, const VenueRanks* ranks) {
  const auto& rec = snapshot.papers.at(id);
  VenueFeatures f;

  auto it = snapshot.venue_index.find(rec.venue);
  if (it != snapshot.venue_index.end() && !it->second.empty()) {
    std::vector<std::size_t> counts;
    double total = 0.0;
    for (corpus::PaperId pid : it->second) {
      const std::size_t c = citations_at_cutoff(snapshot, pid);
      counts.push_back(c);
      total += static_cast<double>(c);
    }
    f.paper_count = static_cast<double>(counts.size());
    f.avg_citations = total / f.paper_count;
    f.h_index = static_cast<double>(h_index(counts));
  }

  const std::string name = lower(rec.venue);
  if (contains_any(name, {"journal", "trans."})) {
    f.is_journal = 1;
  } else if (contains_any(name, {"proc", "conf", "symp", "workshop"})) {
    f.is_conference = 1;
  }

  if (ranks != nullptr) {
    auto rank_it = ranks->find(rec.venue);
    if (rank_it != ranks->end()) {
      f.rank = rank_it->second;
      f.rank_missing = 0;
    }
  }
  return f;
}

VenueRanks read_venue_ranks_csv(std::istream& in) {
  VenueRanks ranks;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) continue;
    const std::string venue = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    try {
      ranks[venue] = std::stod(value);
    } catch (const std::exception&) {
      if (!first) throw DataError("venue rank csv: bad number '" + value + "'");
      // header row tolerated
    }
    first = false;
  }
  return ranks;
}

FeatureBlock article_block(const corpus::CorpusSnapshot& snapshot,
                           const topics::DocTopics& doc_topics,
                           const std::vector<double>& popularity,
                           const std::vector<corpus::PaperId>& node_ids) {
  FeatureBlock block;
  block.columns = {"citation_quality", "popularity", "diversity", "reference_count"};
  for (corpus::PaperId id : node_ids) {
    auto mix = doc_topics.find(id);
    if (mix == doc_topics.end())
      throw DataError("article_block: missing topic mixture for paper " +
                      std::to_string(id));
    block.rows[id] = {
        citation_quality(snapshot, id),
        paper_popularity(mix->second, popularity),
        paper_diversity(mix->second),
        static_cast<double>(snapshot.papers.at(id).references.size()),
    };
  }
  return block;
}

FeatureBlock author_block(const corpus::CorpusSnapshot& snapshot,
                          const std::vector<corpus::PaperId>& node_ids) {
  FeatureBlock block;
  block.columns = {
      "first_author_paper_count", "highest_h_index", "total_h_index",
      "average_h_index", "first_author_h_index", "average_citations",
      "first_author_citations", "highest_citations", "average_paper_count",
      "papers_by_highest_h_author", "coauthor_count"};
  for (corpus::PaperId id : node_ids) {
    const AuthorFeatures f = author_features(snapshot, id);
    block.rows[id] = {f.first_author_paper_count,
                      f.highest_h_index,
                      f.total_h_index,
                      f.average_h_index,
                      f.first_author_h_index,
                      f.average_citations,
                      f.first_author_citations,
                      f.highest_citations,
                      f.average_paper_count,
                      f.papers_by_highest_h_author,
                      f.coauthor_count};
  }
  return block;
}

FeatureBlock venue_block(const corpus::CorpusSnapshot& snapshot,
                         const std::vector<corpus::PaperId>& node_ids,
                         const VenueRanks* ranks) {
  FeatureBlock block;
  block.columns = {"venue_avg_citations", "venue_h_index", "venue_paper_count",
                   "venue_is_journal",    "venue_is_conference",
                   "venue_rank",          "venue_rank_missing"};
  for (corpus::PaperId id : node_ids) {
    const VenueFeatures f = venue_features(snapshot, id, ranks);
    block.rows[id] = {f.avg_citations, f.h_index, f.paper_count, f.is_journal,
                      f.is_conference, f.rank,    f.rank_missing};
  }
  return block;
}

FeatureBlock network_block(const graph::CitationGraph& graph) {
  FeatureBlock block;
  block.columns = {"times_cited_in_graph", "reference_count_in_graph"};
  for (std::size_t i = 0; i < graph.size(); ++i)
    block.rows[graph.node_ids[i]] = {static_cast<double>(graph.in_degree[i]),
                                     static_cast<double>(graph.out_degree[i])};
  return block;
}

std::size_t FeatureMatrix::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw DataError("unknown feature column " + name);
}

FeatureMatrix assemble(const std::vector<corpus::PaperId>& node_ids,
                       const std::vector<FeatureBlock>& blocks) {
  FeatureMatrix matrix;
  matrix.node_ids = node_ids;
  std::size_t m = 0;
  for (const auto& block : blocks) m += block.columns.size();
  matrix.values = Matrix(node_ids.size(), m);

  std::size_t col = 0;
  for (const auto& block : blocks) {
    for (const auto& name : block.columns) matrix.columns.push_back(name);
    for (std::size_t i = 0; i < node_ids.size(); ++i) {
      auto it = block.rows.find(node_ids[i]);
      if (it == block.rows.end())
        throw DataError("assemble: block missing paper " +
                        std::to_string(node_ids[i]));
      if (it->second.size() != block.columns.size())
        throw DataError("assemble: ragged feature block");
      for (std::size_t j = 0; j < it->second.size(); ++j)
        matrix.values(i, col + j) = it->second[j];
    }
    col += block.columns.size();
  }
  if (!all_finite(matrix.values))
    throw NumericError("assemble: non-finite feature value");
  return matrix;
}

FeatureMatrix compute_features(const corpus::CorpusSnapshot& snapshot,
                               const graph::CitationGraph& graph,
                               const topics::DocTopics& doc_topics,
                               const std::vector<double>& popularity,
                               const VenueRanks* ranks) {
  const auto& ids = graph.node_ids;
  return assemble(ids, {article_block(snapshot, doc_topics, popularity, ids),
                        author_block(snapshot, ids),
                        venue_block(snapshot, ids, ranks), network_block(graph)});
}

void normalize(FeatureMatrix& matrix, const std::vector<std::size_t>& train_rows) {
  if (train_rows.empty()) throw DataError("normalize: no training rows");
  const std::size_t m = matrix.values.cols;
  matrix.norm_stats.assign(m, {0.0, 0.0});
  for (std::size_t j = 0; j < m; ++j) {
    double lo = matrix.values(train_rows[0], j);
    double hi = lo;
    for (std::size_t r : train_rows) {
      lo = std::min(lo, matrix.values(r, j));
      hi = std::max(hi, matrix.values(r, j));
    }
    matrix.norm_stats[j] = {lo, hi};
    for (std::size_t i = 0; i < matrix.values.rows; ++i) {
      double v;
      if (hi == lo) {
        v = 0.0;
      } else {
        v = (matrix.values(i, j) - lo) / (hi - lo);
        v = std::clamp(v, -1.0, 2.0);
      }
      matrix.values(i, j) = v;
    }
  }
  matrix.normalized = true;
}

void write_features_csv(const FeatureMatrix& matrix, std::ostream& out) {
  out << "paper_id";
  for (const auto& c : matrix.columns) out << "," << c;
  out << "\n";
  for (std::size_t i = 0; i < matrix.values.rows; ++i) {
    out << matrix.node_ids[i];
    for (std::size_t j = 0; j < matrix.values.cols; ++j)
      out << "," << format_double(matrix.values(i, j));
    out << "\n";
  }
}

FeatureMatrix read_features_csv(std::istream& in) {
  FeatureMatrix matrix;
  std::string line;
  if (!std::getline(in, line)) throw DataError("features csv: empty input");
  {
    std::istringstream header(line);
    std::string cell;
    bool first = true;
    while (std::getline(header, cell, ',')) {
      if (first) {
        first = false;
        continue;
      }
      matrix.columns.push_back(cell);
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, ',')) continue;
    matrix.node_ids.push_back(std::stoll(cell));
    std::vector<double> values;
    while (std::getline(row, cell, ',')) values.push_back(std::stod(cell));
    if (values.size() != matrix.columns.size())
      throw DataError("features csv: ragged row");
    rows.push_back(std::move(values));
  }
  matrix.values = Matrix(rows.size(), matrix.columns.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < matrix.columns.size(); ++j)
      matrix.values(i, j) = rows[i][j];
  return matrix;
}

std::string norm_stats_json(const FeatureMatrix& matrix) {
  nlohmann::json j;
  for (std::size_t i = 0; i < matrix.norm_stats.size(); ++i) {
    j[matrix.columns[i]] = {{"min", matrix.norm_stats[i].first},
                            {"max", matrix.norm_stats[i].second}};
  }
  return j.dump(2);
}

}  // namespace citegcn::features
