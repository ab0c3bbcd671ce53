#include "citegcn/topics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "citegcn/errors.hpp"
#include "citegcn/rng.hpp"
#include "doctest.h"

using namespace citegcn;
using namespace citegcn::topics;

namespace {

// Three disjoint 10-word vocabularies; doc i draws 30 tokens from class i%3.
std::string planted_word(int cls, int j) {
  std::string w(1, static_cast<char>('a' + cls));
  w += 'w';
  w += static_cast<char>('a' + j);
  return w;
}

std::vector<std::vector<std::string>> planted_corpus(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<std::string>> docs;
  for (int i = 0; i < 60; ++i) {
    const int cls = i % 3;
    std::vector<std::string> doc;
    for (int t = 0; t < 30; ++t)
      doc.push_back(planted_word(cls, static_cast<int>(rng.next_below(10))));
    docs.push_back(std::move(doc));
  }
  return docs;
}

LdaConfig planted_config(std::uint64_t seed) {
  LdaConfig cfg = LdaConfig::with_topics(3);
  cfg.alpha = 0.1;
  cfg.iterations = 200;
  cfg.seed = seed;
  return cfg;
}

// Mass a topic row puts on one planted class's ten words.
double class_mass(const TopicModel& model, std::size_t topic, int cls) {
  double mass = 0.0;
  for (int j = 0; j < 10; ++j) {
    auto it = model.vocabulary.find(planted_word(cls, j));
    if (it != model.vocabulary.end()) mass += model.topic_word(topic, it->second);
  }
  return mass;
}

// Best topic-to-class assignment over all 3! permutations.
std::array<std::size_t, 3> best_matching(const TopicModel& model) {
  std::array<std::size_t, 3> perm = {0, 1, 2};
  std::array<std::size_t, 3> best = perm;
  double best_score = -1.0;
  std::sort(perm.begin(), perm.end());
  do {
    double score = 0.0;
    for (int cls = 0; cls < 3; ++cls) score += class_mass(model, perm[cls], cls);
    if (score > best_score) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;  // best[cls] = topic index for planted class cls
}

}  // namespace

TEST_SUITE("topics") {

TEST_CASE("tokenize applies the documented rules") {
  corpus::PaperRecord rec;
  rec.title = "A GCN-based Framework";
  CHECK(tokenize(rec) == std::vector<std::string>{"gcn", "based", "framework"});

  corpus::PaperRecord empty;
  CHECK(tokenize(empty).empty());

  corpus::PaperRecord stops;
  stops.title = "The the THE";
  CHECK(tokenize(stops).empty());

  corpus::PaperRecord mixed;
  mixed.title = "Deep2 Learning";
  mixed.abstract = "of graphs; x y";
  CHECK(tokenize(mixed) == std::vector<std::string>{"deep", "learning", "graphs"});
}

TEST_CASE("vocabulary pruning drops single-document tokens") {
  std::vector<std::vector<std::string>> docs = {
      {"alpha", "beta", "unique"}, {"alpha", "beta"}, {"alpha", "beta"}};
  LdaConfig cfg = LdaConfig::with_topics(2);
  cfg.iterations = 5;
  auto model = fit_lda(docs, cfg);
  CHECK(model.vocabulary.count("alpha") == 1);
  CHECK(model.vocabulary.count("beta") == 1);
  CHECK(model.vocabulary.count("unique") == 0);
}

TEST_CASE("topic word rows are simplexes") {
  std::vector<std::vector<std::string>> docs(4, {"red", "green", "blue"});
  LdaConfig cfg = LdaConfig::with_topics(2);
  cfg.iterations = 10;
  auto model = fit_lda(docs, cfg);
  REQUIRE(model.topic_word.rows == 2);
  for (std::size_t k = 0; k < model.topic_word.rows; ++k) {
    double sum = 0.0;
    for (std::size_t w = 0; w < model.topic_word.cols; ++w) {
      CHECK(model.topic_word(k, w) >= 0.0);
      sum += model.topic_word(k, w);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("same seed gives bit-identical models") {
  auto docs = planted_corpus(3);
  auto a = fit_lda(docs, planted_config(77));
  auto b = fit_lda(docs, planted_config(77));
  CHECK(a.topic_word.data == b.topic_word.data);
  CHECK(a.vocabulary == b.vocabulary);
}

TEST_CASE("all-empty corpus is an error") {
  std::vector<std::vector<std::string>> docs = {{}, {}};
  CHECK_THROWS_AS(fit_lda(docs, LdaConfig::with_topics(2)), DataError);
  CHECK_THROWS_AS(fit_lda({{"solo"}}, LdaConfig::with_topics(2)), DataError);
}

TEST_CASE("bad hyperparameters are config errors") {
  std::vector<std::vector<std::string>> docs = {{"aa", "bb"}, {"aa", "bb"}};
  LdaConfig cfg = LdaConfig::with_topics(1);
  CHECK_THROWS_AS(fit_lda(docs, cfg), ConfigError);
  cfg = LdaConfig::with_topics(2);
  cfg.iterations = 0;
  CHECK_THROWS_AS(fit_lda(docs, cfg), ConfigError);
}

TEST_CASE("planted vocabularies concentrate in distinct topics") {
  auto docs = planted_corpus(5);
  auto model = fit_lda(docs, planted_config(11));
  auto match = best_matching(model);
  CHECK(match[0] != match[1]);
  CHECK(match[1] != match[2]);
  for (int cls = 0; cls < 3; ++cls)
    CHECK(class_mass(model, match[cls], cls) >= 0.8);
}

TEST_CASE("inference recovers the planted topic") {
  auto docs = planted_corpus(5);
  auto model = fit_lda(docs, planted_config(11));
  auto match = best_matching(model);
  auto mixtures = infer_topics(model, docs, 20, 123);
  int recovered = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    REQUIRE(mixtures[d].size() == 3);
    double sum = std::accumulate(mixtures[d].begin(), mixtures[d].end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    if (mixtures[d][match[d % 3]] >= 0.6) ++recovered;
  }
  CHECK(recovered >= 48);  // at least 80 percent of 60 docs
}

TEST_CASE("empty document infers the uniform mixture") {
  auto docs = planted_corpus(5);
  auto model = fit_lda(docs, planted_config(11));
  auto mixtures = infer_topics(model, {{}}, 20, 9);
  REQUIRE(mixtures.size() == 1);
  for (double p : mixtures[0]) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("document order changes topics at most up to permutation") {
  auto docs = planted_corpus(5);
  auto model_a = fit_lda(docs, planted_config(19));
  std::reverse(docs.begin(), docs.end());
  auto model_b = fit_lda(docs, planted_config(19));

  auto match_a = best_matching(model_a);
  auto match_b = best_matching(model_b);
  REQUIRE(model_a.vocabulary == model_b.vocabulary);
  for (int cls = 0; cls < 3; ++cls) {
    double tv = 0.0;
    for (std::size_t w = 0; w < model_a.topic_word.cols; ++w)
      tv += std::abs(model_a.topic_word(match_a[cls], w) -
                     model_b.topic_word(match_b[cls], w));
    CHECK(tv / 2.0 <= 0.1);
  }
}

TEST_CASE("model file round trips") {
  auto docs = planted_corpus(5);
  auto model = fit_lda(docs, planted_config(31));
  const auto dir = std::filesystem::temp_directory_path() / "citegcn_lda_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.bin").string();
  save_topic_model(model, path);
  auto loaded = load_topic_model(path);
  CHECK(loaded.num_topics == model.num_topics);
  CHECK(loaded.vocabulary == model.vocabulary);
  CHECK(loaded.topic_word.data == model.topic_word.data);
  CHECK(loaded.alpha == model.alpha);
  CHECK(loaded.beta == model.beta);
  std::filesystem::remove_all(dir);
}

TEST_CASE("doc topics csv round trips") {
  DocTopics dt;
  dt[3] = {0.25, 0.75};
  dt[9] = {0.5, 0.5};
  std::ostringstream out;
  write_doc_topics_csv(dt, out);
  std::istringstream in(out.str());
  auto back = read_doc_topics_csv(in);
  CHECK(back == dt);
}

TEST_CASE("snapshot mixtures key substreams by paper id") {
  std::vector<corpus::PaperRecord> records;
  for (int i = 0; i < 12; ++i) {
    corpus::PaperRecord rec;
    rec.id = i * 10;
    rec.year = 2005;
    rec.authors = {"A"};
    rec.venue = "V";
    const int cls = i % 3;
    for (int t = 0; t < 8; ++t) rec.title += planted_word(cls, t) + " ";
    records.push_back(rec);
  }
  auto snap = corpus::build_snapshot(records, 2005);
  auto docs = planted_corpus(5);
  auto model = fit_lda(docs, planted_config(11));
  auto a = compute_doc_topics(model, snap, 10, 55);
  auto b = compute_doc_topics(model, snap, 10, 55);
  CHECK(a == b);
  REQUIRE(a.count(30) == 1);
  CHECK(a.at(30).size() == 3);
}

}  // TEST_SUITE
