#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "citegcn/corpus.hpp"
#include "citegcn/matrix.hpp"

namespace citegcn::topics {

// Lowercases title+abstract, splits on non-alphabetic characters, drops
// tokens shorter than two characters and built-in English stopwords.
std::vector<std::string> tokenize(const corpus::PaperRecord& record);
std::vector<std::string> tokenize_text(const std::string& text);

bool is_stopword(const std::string& token);

struct LdaConfig {
  int num_topics = 50;
  double alpha = 1.0;  // symmetric document-topic prior, 50/num_topics
  double beta = 0.01;  // symmetric topic-word prior
  int iterations = 200;
  int infer_iterations = 20;
  int min_doc_freq = 2;  // vocabulary pruning threshold
  std::uint64_t seed = 1;

  static LdaConfig with_topics(int k) {
    LdaConfig c;
    c.num_topics = k;
    c.alpha = 50.0 / k;
    return c;
  }
};

struct TopicModel {
  int num_topics = 0;
  std::map<std::string, std::size_t> vocabulary;  // token -> column
  Matrix topic_word;                              // K x V, rows are simplexes
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
};

// Collapsed Gibbs sampling over the given token lists. Tokens outside the
// pruned vocabulary are ignored; a corpus with no usable tokens is an error.
TopicModel fit_lda(const std::vector<std::vector<std::string>>& docs,
                   const LdaConfig& config);

// Per-document Gibbs inference with the topic_word rows frozen. Each doc gets
// its own substream of `seed`, so results do not depend on evaluation order.
// Returns smoothed proportions; empty docs get the uniform vector.
std::vector<std::vector<double>> infer_topics(
    const TopicModel& model, const std::vector<std::vector<std::string>>& docs,
    int sweeps, std::uint64_t seed);

using DocTopics = std::map<corpus::PaperId, std::vector<double>>;

// Tokenizes every snapshot paper and infers its topic mixture.
DocTopics compute_doc_topics(const TopicModel& model,
                             const corpus::CorpusSnapshot& snapshot,
                             int sweeps, std::uint64_t seed);

void save_topic_model(const TopicModel& model, const std::string& path);
TopicModel load_topic_model(const std::string& path);

// CSV rows: paper_id, p_0 .. p_{K-1}.
void write_doc_topics_csv(const DocTopics& doc_topics, std::ostream& out);
DocTopics read_doc_topics_csv(std::istream& in);

}  // namespace citegcn::topics
