#include "citegcn/topics.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "citegcn/binio.hpp"
#include "citegcn/errors.hpp"
#include "citegcn/format.hpp"
#include "citegcn/rng.hpp"
#include "citegcn/stopwords_data.hpp"

namespace citegcn::topics {

namespace {

const std::unordered_set<std::string>& stopword_set() {
  static const std::unordered_set<std::string> set = [] {
    std::unordered_set<std::string> s;
    std::istringstream in(kStopwordsText);
    std::string line;
    while (std::getline(in, line)) {
      while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
        line.pop_back();
      if (!line.empty()) s.insert(line);
    }
    return s;
  }();
  return set;
}

}  // namespace

bool is_stopword(const std::string& token) {
  return stopword_set().count(token) != 0;
}

std::vector<std::string> tokenize_text(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2 && !is_stopword(cur)) out.push_back(cur);
    cur.clear();
  };
  for (unsigned char ch : text) {
    if (std::isalpha(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> tokenize(const corpus::PaperRecord& record) {
  std::vector<std::string> out = tokenize_text(record.title);
  std::vector<std::string> abs = tokenize_text(record.abstract);
  out.insert(out.end(), abs.begin(), abs.end());
  return out;
}

namespace {

// Vocabulary columns are assigned in lexicographic token order, so the model
// layout is independent of document order.
std::map<std::string, std::size_t> build_vocabulary(
    const std::vector<std::vector<std::string>>& docs, int min_doc_freq) {
  std::map<std::string, std::size_t> doc_freq;
  for (const auto& doc : docs) {
    std::unordered_set<std::string> uniq(doc.begin(), doc.end());
    for (const auto& tok : uniq) ++doc_freq[tok];
  }
  std::map<std::string, std::size_t> vocab;
  std::size_t col = 0;
  for (const auto& [tok, df] : doc_freq)
    if (df >= static_cast<std::size_t>(min_doc_freq)) vocab[tok] = col++;
  return vocab;
}

std::vector<std::vector<std::size_t>> map_to_ids(
    const std::vector<std::vector<std::string>>& docs,
    const std::map<std::string, std::size_t>& vocab) {
  std::vector<std::vector<std::size_t>> ids(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& tok : docs[d]) {
      auto it = vocab.find(tok);
      if (it != vocab.end()) ids[d].push_back(it->second);
    }
  }
  return ids;
}

}  // namespace

TopicModel fit_lda(const std::vector<std::vector<std::string>>& docs,
                   const LdaConfig& config) {
  if (config.num_topics < 2) throw ConfigError("fit_lda: num_topics must be >= 2");
  if (config.iterations < 1) throw ConfigError("fit_lda: iterations must be >= 1");
  if (config.alpha <= 0.0 || config.beta <= 0.0)
    throw ConfigError("fit_lda: priors must be positive");

  auto vocab = build_vocabulary(docs, config.min_doc_freq);
  const std::size_t V = vocab.size();
  const std::size_t K = static_cast<std::size_t>(config.num_topics);
  auto ids = map_to_ids(docs, vocab);

  std::size_t total_tokens = 0;
  for (const auto& doc : ids) total_tokens += doc.size();
  if (V == 0 || total_tokens == 0)
    throw DataError("fit_lda: corpus has no usable tokens");

  const std::size_t D = ids.size();
  std::vector<std::size_t> n_dk(D * K, 0);
  std::vector<std::size_t> n_kw(K * V, 0);
  std::vector<std::size_t> n_k(K, 0);
  std::vector<std::vector<std::size_t>> assign(D);

  Rng rng(config.seed);
  for (std::size_t d = 0; d < D; ++d) {
    assign[d].resize(ids[d].size());
    for (std::size_t i = 0; i < ids[d].size(); ++i) {
      const std::size_t k = rng.next_below(K);
      assign[d][i] = k;
      ++n_dk[d * K + k];
      ++n_kw[k * V + ids[d][i]];
      ++n_k[k];
    }
  }

  const double vbeta = static_cast<double>(V) * config.beta;
  std::vector<double> weights(K);
  for (int sweep = 0; sweep < config.iterations; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t i = 0; i < ids[d].size(); ++i) {
        const std::size_t w = ids[d][i];
        const std::size_t old_k = assign[d][i];
        --n_dk[d * K + old_k];
        --n_kw[old_k * V + w];
        --n_k[old_k];

        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          const double p = (static_cast<double>(n_dk[d * K + k]) + config.alpha) *
                           (static_cast<double>(n_kw[k * V + w]) + config.beta) /
                           (static_cast<double>(n_k[k]) + vbeta);
          weights[k] = p;
          total += p;
        }
        const std::size_t new_k = rng.weighted_pick(weights, total);
        assign[d][i] = new_k;
        ++n_dk[d * K + new_k];
        ++n_kw[new_k * V + w];
        ++n_k[new_k];
      }
    }
  }

  TopicModel model;
  model.num_topics = config.num_topics;
  model.vocabulary = std::move(vocab);
  model.alpha = config.alpha;
  model.beta = config.beta;
  model.seed = config.seed;
  model.topic_word = Matrix(K, V);
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t w = 0; w < V; ++w)
      model.topic_word(k, w) = (static_cast<double>(n_kw[k * V + w]) + config.beta) /
                               (static_cast<double>(n_k[k]) + vbeta);
  return model;
}

std::vector<std::vector<double>> infer_topics(
    const TopicModel& model, const std::vector<std::vector<std::string>>& docs,
    int sweeps, std::uint64_t seed) {
  const std::size_t K = static_cast<std::size_t>(model.num_topics);
  if (K == 0) throw ConfigError("infer_topics: model is not fitted");
  auto ids = map_to_ids(docs, model.vocabulary);

  std::vector<std::vector<double>> out(docs.size());
  Rng base(seed);
  std::vector<double> weights(K);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& doc = ids[d];
    auto& dist = out[d];
    dist.assign(K, 0.0);
    if (doc.empty()) {
      for (auto& p : dist) p = 1.0 / static_cast<double>(K);
      continue;
    }
    Rng rng = base.fork(d);
    std::vector<std::size_t> n_dk(K, 0);
    std::vector<std::size_t> assign(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      const std::size_t k = rng.next_below(K);
      assign[i] = k;
      ++n_dk[k];
    }
    for (int sweep = 0; sweep < sweeps; ++sweep) {
      for (std::size_t i = 0; i < doc.size(); ++i) {
        const std::size_t w = doc[i];
        --n_dk[assign[i]];
        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          const double p = (static_cast<double>(n_dk[k]) + model.alpha) *
                           model.topic_word(k, w);
          weights[k] = p;
          total += p;
        }
        const std::size_t new_k = rng.weighted_pick(weights, total);
        assign[i] = new_k;
        ++n_dk[new_k];
      }
    }
    const double denom = static_cast<double>(doc.size()) +
                         static_cast<double>(K) * model.alpha;
    for (std::size_t k = 0; k < K; ++k)
      dist[k] = (static_cast<double>(n_dk[k]) + model.alpha) / denom;
  }
  return out;
}

DocTopics compute_doc_topics(const TopicModel& model,
                             const corpus::CorpusSnapshot& snapshot,
                             int sweeps, std::uint64_t seed) {
  std::vector<corpus::PaperId> order;
  std::vector<std::vector<std::string>> docs;
  for (const auto& [id, rec] : snapshot.papers) {
    order.push_back(id);
    docs.push_back(tokenize(rec));
  }
  // Substreams are keyed by paper id, not list position, so mixtures are
  // stable under snapshot growth.
  DocTopics out;
  Rng base(seed);
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::vector<std::vector<double>> one = infer_topics(
        model, {docs[i]}, sweeps,
        base.fork(static_cast<std::uint64_t>(order[i])).seed());
    out[order[i]] = std::move(one[0]);
  }
  return out;
}

namespace {
constexpr char kModelMagic[8] = {'C', 'G', 'L', 'D', 'A', '0', '0', '\0'};
constexpr std::uint32_t kModelVersion = 1;
using namespace citegcn::binio;
}  // namespace

void save_topic_model(const TopicModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write topic model: " + path);
  out.write(kModelMagic, 8);
  put_u32(out, kModelVersion);
  put_i64(out, model.num_topics);
  put_f64(out, model.alpha);
  put_f64(out, model.beta);
  put_u64(out, model.seed);
  put_u64(out, model.vocabulary.size());
  for (const auto& [tok, col] : model.vocabulary) {
    put_string(out, tok);
    put_u64(out, col);
  }
  put_u64(out, model.topic_word.rows);
  put_u64(out, model.topic_word.cols);
  for (double v : model.topic_word.data) put_f64(out, v);
  if (!out) throw DataError("write failure: " + path);
}

TopicModel load_topic_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open topic model: " + path);
  char magic[8] = {};
  in.read(magic, 8);
  if (!in || !std::equal(magic, magic + 8, kModelMagic))
    throw DataError("not a topic model file: " + path);
  if (get_u32(in) != kModelVersion)
    throw DataError("unsupported topic model version: " + path);
  TopicModel model;
  model.num_topics = static_cast<int>(get_i64(in));
  model.alpha = get_f64(in);
  model.beta = get_f64(in);
  model.seed = get_u64(in);
  const std::uint64_t vocab_size = get_u64(in);
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    std::string tok = get_string(in);
    model.vocabulary[tok] = get_u64(in);
  }
  const std::uint64_t rows = get_u64(in);
  const std::uint64_t cols = get_u64(in);
  model.topic_word = Matrix(rows, cols);
  for (auto& v : model.topic_word.data) v = get_f64(in);
  if (!in) throw DataError("truncated topic model: " + path);
  return model;
}

void write_doc_topics_csv(const DocTopics& doc_topics, std::ostream& out) {
  if (doc_topics.empty()) return;
  const std::size_t K = doc_topics.begin()->second.size();
  out << "paper_id";
  for (std::size_t k = 0; k < K; ++k) out << ",p_" << k;
  out << "\n";
  for (const auto& [id, dist] : doc_topics) {
    out << id;
    for (double p : dist) out << "," << format_double(p);
    out << "\n";
  }
}

DocTopics read_doc_topics_csv(std::istream& in) {
  DocTopics out;
  std::string line;
  if (!std::getline(in, line)) return out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, ',')) continue;
    const corpus::PaperId id = std::stoll(cell);
    std::vector<double> dist;
    while (std::getline(row, cell, ',')) dist.push_back(std::stod(cell));
    out[id] = std::move(dist);
  }
  return out;
}

}  // namespace citegcn::topics
