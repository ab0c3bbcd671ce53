#include "citegcn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "citegcn/errors.hpp"
#include "citegcn/format.hpp"
#include "citegcn/rng.hpp"

namespace citegcn::synth {

namespace {

// Letter-only base-26 encoding, so every generated token survives the
// alphabetic tokenizer.
std::string letters(std::size_t value) {
  std::string out;
  do {
    out.push_back(static_cast<char>('a' + value % 26));
    value /= 26;
  } while (value > 0);
  std::reverse(out.begin(), out.end());
  return out;
}

std::string topic_word(std::size_t topic, std::size_t word) {
  return "t" + letters(topic) + "w" + letters(word);
}

std::string shared_word(std::size_t word) { return "common" + letters(word); }

void validate(const SynthConfig& config) {
  if (config.num_papers < 1 || config.num_authors < 1 ||
      config.num_venues < 1 || config.num_topics < 1)
    throw ConfigError("synth counts must all be >= 1");
  if (config.end_year < config.start_year)
    throw ConfigError("end_year must be >= start_year");
  if (config.noise < 0.0) throw ConfigError("noise must be >= 0");
  if (config.attachment_strength < 0.0)
    throw ConfigError("attachment_strength must be >= 0");
  if (config.same_topic_boost < 0.0)
    throw ConfigError("same_topic_boost must be >= 0");
  if (config.references_mean < 0.0)
    throw ConfigError("references_mean must be >= 0");
  if (!config.topic_popularity.empty()) {
    if (config.topic_popularity.size() != config.num_topics)
      throw ConfigError("topic_popularity must list one weight per topic");
    double total = 0.0;
    for (double w : config.topic_popularity) {
      if (w < 0.0) throw ConfigError("topic weights must be >= 0");
      total += w;
    }
    if (total <= 0.0) throw ConfigError("topic weights must not all be zero");
  }
}

constexpr std::size_t kWordsPerTopic = 40;
constexpr std::size_t kSharedWords = 40;
constexpr std::size_t kTitleWords = 6;
constexpr std::size_t kAbstractWords = 18;
constexpr std::size_t kMaxReferences = 40;

}  // namespace

SynthResult generate(const SynthConfig& config) {
  validate(config);
  Rng rng(config.seed);

  const std::size_t total_years =
      static_cast<std::size_t>(config.end_year - config.start_year + 1) +
      config.delta_years;
  const std::size_t base_quota = config.num_papers / total_years;
  const std::size_t extra_years = config.num_papers % total_years;

  std::vector<double> topic_weights = config.topic_popularity;
  if (topic_weights.empty())
    topic_weights.assign(config.num_topics, 1.0);

  SynthResult result;
  result.cutoff_year = config.end_year;
  result.records.reserve(config.num_papers);

  std::vector<std::size_t> topics;          // per paper, in generation order
  std::vector<std::size_t> citation_count;  // running in-degree
  topics.reserve(config.num_papers);
  citation_count.reserve(config.num_papers);

  auto draw_word = [&](std::size_t topic) {
    if (config.noise > 0.0 && rng.next_double() < config.noise)
      return shared_word(rng.next_below(kSharedWords));
    return topic_word(topic, rng.next_below(kWordsPerTopic));
  };

  std::vector<double> weights;
  for (std::size_t year_index = 0; year_index < total_years; ++year_index) {
    const int year = config.start_year + static_cast<int>(year_index);
    const std::size_t quota = base_quota + (year_index < extra_years ? 1 : 0);
    const std::size_t pool = result.records.size();  // papers from earlier years

    for (std::size_t q = 0; q < quota; ++q) {
      corpus::PaperRecord rec;
      rec.id = static_cast<corpus::PaperId>(result.records.size() + 1);
      rec.year = year;

      const std::size_t topic = rng.weighted_pick(topic_weights);
      topics.push_back(topic);
      citation_count.push_back(0);

      const std::size_t n_authors = 1 + rng.next_below(5);
      std::vector<std::size_t> chosen;
      while (chosen.size() < std::min(n_authors, config.num_authors)) {
        const std::size_t a = rng.next_below(config.num_authors);
        if (std::find(chosen.begin(), chosen.end(), a) == chosen.end())
          chosen.push_back(a);
      }
      for (std::size_t a : chosen) {
        rec.authors.push_back("au" + letters(a));
        rec.affiliations.push_back("inst" + letters(a % 50));
      }

      const std::size_t v = rng.next_below(config.num_venues);
      rec.venue = (v % 2 == 0 ? "journal of " : "proceedings of ") + letters(v);

      std::string title, abstract;
      for (std::size_t w = 0; w < kTitleWords; ++w) {
        if (w > 0) title += ' ';
        title += draw_word(topic);
      }
      for (std::size_t w = 0; w < kAbstractWords; ++w) {
        if (w > 0) abstract += ' ';
        abstract += draw_word(topic);
      }
      rec.title = title;
      rec.abstract = abstract;

      if (pool > 0 && config.references_mean > 0.0) {
        std::size_t want = rng.poisson(config.references_mean);
        want = std::min({want, pool, kMaxReferences});
        weights.assign(pool, 0.0);
        for (std::size_t cand = 0; cand < pool; ++cand) {
          double w = 1.0 + config.attachment_strength *
                               static_cast<double>(citation_count[cand]);
          if (topics[cand] == topic) w *= 1.0 + config.same_topic_boost;
          weights[cand] = w;
        }
        for (std::size_t r = 0; r < want; ++r) {
          const std::size_t cand = rng.weighted_pick(weights);
          weights[cand] = 0.0;  // without replacement
          rec.references.push_back(static_cast<corpus::PaperId>(cand + 1));
          ++citation_count[cand];
        }
        std::sort(rec.references.begin(), rec.references.end());
      }
      result.records.push_back(std::move(rec));
    }
  }

  // Ground truth for every paper at or before the cutoff.
  const int horizon = config.end_year + static_cast<int>(config.delta_years);
  std::vector<std::size_t> future(result.records.size(), 0);
  std::vector<std::size_t> cutoff_citers(result.records.size(), 0);
  for (const auto& rec : result.records) {
    for (corpus::PaperId ref : rec.references) {
      const std::size_t target = static_cast<std::size_t>(ref - 1);
      if (rec.year > config.end_year && rec.year <= horizon) ++future[target];
      if (rec.year <= config.end_year) ++cutoff_citers[target];
    }
  }

  // Planted regression target: a quadratic in the neighbor-averaged
  // out-degree, a quantity no per-paper feature column carries directly.
  std::vector<double> planted(result.records.size(), 0.0);
  if (config.planted_targets) {
    const std::size_t n = result.records.size();
    std::vector<std::vector<std::size_t>> neighbors(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& rec = result.records[i];
      if (rec.year > config.end_year) continue;
      for (corpus::PaperId ref : rec.references) {
        const std::size_t j = static_cast<std::size_t>(ref - 1);
        neighbors[i].push_back(j);
        neighbors[j].push_back(i);
      }
    }
    Rng noise_rng = rng.fork(0x9e3779b9u);
    for (std::size_t i = 0; i < n; ++i) {
      if (result.records[i].year > config.end_year) continue;
      // Self-inclusive neighborhood mean; references point strictly backward
      // in time, so the neighbor lists hold no duplicates and no self entries.
      double mean_out = static_cast<double>(result.records[i].references.size());
      for (std::size_t j : neighbors[i])
        mean_out += static_cast<double>(result.records[j].references.size());
      mean_out /= static_cast<double>(neighbors[i].size() + 1);
      double target = mean_out * mean_out / 2.0;
      target += noise_rng.uniform(-5.0 * config.noise, 5.0 * config.noise);
      planted[i] = std::max(target, 0.0);
    }
  }

  for (std::size_t i = 0; i < result.records.size(); ++i) {
    if (result.records[i].year > config.end_year) continue;
    GroundTruth row;
    row.id = result.records[i].id;
    row.topic = topics[i];
    row.future_citations = future[i];
    row.planted_target = planted[i];
    result.truth.push_back(row);
  }
  return result;
}

void write_truth_csv(const SynthResult& result, std::ostream& out) {
  out << "id,topic,future_citations,planted_target\n";
  for (const auto& row : result.truth) {
    out << row.id << ',' << row.topic << ',' << row.future_citations << ','
        << format_double(row.planted_target) << "\n";
  }
}

std::vector<GroundTruth> read_truth_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "id,topic,future_citations,planted_target")
    throw DataError("truth csv header is missing or unrecognized");
  std::vector<GroundTruth> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string id_s, topic_s, future_s, target_s;
    if (!std::getline(fields, id_s, ',') || !std::getline(fields, topic_s, ',') ||
        !std::getline(fields, future_s, ',') || !std::getline(fields, target_s))
      throw DataError("truth csv line " + std::to_string(line_no) +
                      " does not have four fields");
    GroundTruth row;
    try {
      row.id = std::stoll(id_s);
      row.topic = static_cast<std::size_t>(std::stoull(topic_s));
      row.future_citations = static_cast<std::size_t>(std::stoull(future_s));
      row.planted_target = std::stod(target_s);
    } catch (const std::exception&) {
      throw DataError("truth csv line " + std::to_string(line_no) +
                      " has an unparseable field");
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace citegcn::synth
