#include "citegcn/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "citegcn/binio.hpp"
#include "citegcn/errors.hpp"
#include "citegcn/rng.hpp"
#include "json.hpp"

namespace citegcn::corpus {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_semicolons(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(';', start);
    const auto end = (pos == std::string::npos) ? s.size() : pos;
    const std::string piece = trim(s.substr(start, end - start));
    if (!piece.empty()) out.push_back(piece);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_i64(const std::string& s, std::int64_t& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

// Shared invariant enforcement for both input formats: dedupe references and
// drop self references, reporting each repair.
void finalize_references(PaperRecord& rec, std::size_t line,
                         std::vector<ParseDiagnostic>& diags) {
  std::vector<PaperId> cleaned;
  std::set<PaperId> seen;
  for (PaperId ref : rec.references) {
    if (ref == rec.id) {
      diags.push_back({line, "self reference " + std::to_string(ref) + " dropped"});
      continue;
    }
    if (!seen.insert(ref).second) {
      diags.push_back({line, "duplicate reference " + std::to_string(ref) + " dropped"});
      continue;
    }
    cleaned.push_back(ref);
  }
  rec.references = std::move(cleaned);
}

struct RecordBuilder {
  PaperRecord rec;
  bool has_id = false;
  bool has_year = false;
  bool bad = false;
  std::size_t first_line = 0;
  std::size_t seen_fields = 0;

  void flush(ParseResult& out) {
    if (seen_fields == 0) return;
    if (!bad) {
      if (!has_id) {
        out.diagnostics.push_back({first_line, "record missing #index id; skipped"});
      } else if (!has_year) {
        out.diagnostics.push_back({first_line, "record missing #t year; skipped"});
      } else {
        finalize_references(rec, first_line, out.diagnostics);
        out.records.push_back(std::move(rec));
      }
    }
    *this = RecordBuilder{};
  }
};

}  // namespace

ParseResult parse_aminer(std::istream& in) {
  ParseResult out;
  RecordBuilder cur;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      cur.flush(out);
      continue;
    }
    if (cur.seen_fields == 0) cur.first_line = lineno;
    ++cur.seen_fields;

    auto value_after = [&](std::size_t prefix_len) {
      return trim(line.substr(prefix_len));
    };

    if (line.rfind("#index", 0) == 0) {
      std::int64_t id = 0;
      if (!parse_i64(value_after(6), id)) {
        out.diagnostics.push_back({lineno, "unparseable #index '" + value_after(6) + "'; record skipped"});
        cur.bad = true;
      } else if (cur.has_id) {
        out.diagnostics.push_back({lineno, "repeated #index; first value kept"});
      } else {
        cur.rec.id = id;
        cur.has_id = true;
      }
    } else if (line.rfind("#*", 0) == 0) {
      cur.rec.title = value_after(2);
    } else if (line.rfind("#@", 0) == 0) {
      cur.rec.authors = split_semicolons(line.substr(2));
    } else if (line.rfind("#o", 0) == 0) {
      cur.rec.affiliations = split_semicolons(line.substr(2));
    } else if (line.rfind("#t", 0) == 0) {
      std::int64_t year = 0;
      if (!parse_i64(value_after(2), year) || year <= 0) {
        out.diagnostics.push_back({lineno, "malformed year '" + value_after(2) + "'; record skipped"});
        cur.bad = true;
      } else {
        cur.rec.year = static_cast<int>(year);
        cur.has_year = true;
      }
    } else if (line.rfind("#c", 0) == 0) {
      cur.rec.venue = value_after(2);
    } else if (line.rfind("#%", 0) == 0) {
      std::int64_t ref = 0;
      if (!parse_i64(value_after(2), ref)) {
        out.diagnostics.push_back({lineno, "unparseable reference id '" + value_after(2) + "'; line skipped"});
      } else {
        cur.rec.references.push_back(ref);
      }
    } else if (line.rfind("#!", 0) == 0) {
      cur.rec.abstract = value_after(2);
    } else if (line[0] == '#') {
      // Unknown field prefix: tolerated for forward compatibility.
    } else {
      out.diagnostics.push_back({lineno, "stray line outside any field; skipped"});
    }
  }
  if (in.bad()) throw DataError("stream read failure while parsing AMiner input");
  cur.flush(out);
  return out;
}

ParseResult parse_jsonl(std::istream& in) {
  ParseResult out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      out.diagnostics.push_back({lineno, "unparseable JSON record; skipped"});
      continue;
    }
    PaperRecord rec;
    if (!j.contains("id") || !j["id"].is_number_integer()) {
      out.diagnostics.push_back({lineno, "record missing integer id; skipped"});
      continue;
    }
    rec.id = j["id"].get<std::int64_t>();
    if (!j.contains("year") || !j["year"].is_number_integer() ||
        j["year"].get<std::int64_t>() <= 0) {
      out.diagnostics.push_back({lineno, "malformed year; record skipped"});
      continue;
    }
    rec.year = j["year"].get<int>();
    rec.title = j.value("title", "");
    rec.abstract = j.value("abstract", "");
    rec.venue = j.value("venue", "");
    if (j.contains("authors") && j["authors"].is_array())
      for (const auto& a : j["authors"]) rec.authors.push_back(a.get<std::string>());
    if (j.contains("affiliations") && j["affiliations"].is_array())
      for (const auto& a : j["affiliations"]) rec.affiliations.push_back(a.get<std::string>());
    if (j.contains("references") && j["references"].is_array())
      for (const auto& r : j["references"]) rec.references.push_back(r.get<std::int64_t>());
    finalize_references(rec, lineno, out.diagnostics);
    out.records.push_back(std::move(rec));
  }
  if (in.bad()) throw DataError("stream read failure while parsing JSONL input");
  return out;
}

namespace {

bool looks_gzip(const std::string& bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

std::string gunzip_file(const std::string& path) {
  gzFile f = gzopen(path.c_str(), "rb");
  if (f == nullptr) throw DataError("cannot open gzip file: " + path);
  std::string out;
  char buf[1 << 16];
  int n = 0;
  while ((n = gzread(f, buf, sizeof(buf))) > 0) out.append(buf, static_cast<std::size_t>(n));
  const bool ok = (n == 0);
  gzclose(f);
  if (!ok) throw DataError("gzip read failure: " + path);
  return out;
}

}  // namespace

ParseResult parse_records_text(const std::string& text) {
  const auto pos = text.find_first_not_of(" \t\r\n");
  std::istringstream in(text);
  if (pos != std::string::npos && text[pos] == '{') return parse_jsonl(in);
  return parse_aminer(in);
}

ParseResult parse_records_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open input file: " + path);
  std::string head(2, '\0');
  f.read(head.data(), 2);
  head.resize(static_cast<std::size_t>(f.gcount()));
  f.clear();
  f.seekg(0);
  if (looks_gzip(head)) return parse_records_text(gunzip_file(path));
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw DataError("read failure: " + path);
  return parse_records_text(ss.str());
}

void write_aminer(const std::vector<PaperRecord>& records, std::ostream& out) {
  bool first = true;
  for (const auto& rec : records) {
    if (!first) out << "\n";
    first = false;
    out << "#index " << rec.id << "\n";
    if (!rec.title.empty()) out << "#* " << rec.title << "\n";
    if (!rec.authors.empty()) {
      out << "#@ ";
      for (std::size_t i = 0; i < rec.authors.size(); ++i) {
        if (i) out << ";";
        out << rec.authors[i];
      }
      out << "\n";
    }
    if (!rec.affiliations.empty()) {
      out << "#o ";
      for (std::size_t i = 0; i < rec.affiliations.size(); ++i) {
        if (i) out << ";";
        out << rec.affiliations[i];
      }
      out << "\n";
    }
    out << "#t " << rec.year << "\n";
    if (!rec.venue.empty()) out << "#c " << rec.venue << "\n";
    for (PaperId ref : rec.references) out << "#% " << ref << "\n";
    if (!rec.abstract.empty()) out << "#! " << rec.abstract << "\n";
  }
}

void write_jsonl(const std::vector<PaperRecord>& records, std::ostream& out) {
  for (const auto& rec : records) {
    nlohmann::json j;
    j["id"] = rec.id;
    j["title"] = rec.title;
    j["abstract"] = rec.abstract;
    j["authors"] = rec.authors;
    j["affiliations"] = rec.affiliations;
    j["venue"] = rec.venue;
    j["year"] = rec.year;
    j["references"] = rec.references;
    out << j.dump() << "\n";
  }
}

std::string CleanReport::to_json() const {
  nlohmann::json j;
  j["input_records"] = input_records;
  j["kept"] = kept;
  j["dropped_missing_author"] = dropped_missing_author;
  j["dropped_missing_venue"] = dropped_missing_venue;
  j["dropped_anomalous_productivity"] = dropped_anomalous_productivity;
  return j.dump(2);
}

std::pair<std::vector<PaperRecord>, CleanReport> clean(
    const std::vector<PaperRecord>& records, const CleanConfig& config) {
  CleanReport report;
  report.input_records = records.size();

  std::vector<PaperRecord> survivors;
  survivors.reserve(records.size());
  for (const auto& rec : records) {
    if (rec.authors.empty()) {
      ++report.dropped_missing_author;
      continue;
    }
    if (rec.venue.empty()) {
      ++report.dropped_missing_venue;
      continue;
    }
    PaperRecord copy = rec;
    copy.affiliations.resize(copy.authors.size());
    for (auto& aff : copy.affiliations)
      if (aff.empty()) aff = config.missing_affiliation;
    survivors.push_back(std::move(copy));
  }

  // Per-author per-year record counts; records of an author who exceeds the
  // cap in a year are dropped for that year only.
  std::map<std::pair<std::string, int>, std::size_t> productivity;
  for (const auto& rec : survivors) {
    std::set<std::string> uniq(rec.authors.begin(), rec.authors.end());
    for (const auto& a : uniq) ++productivity[{a, rec.year}];
  }

  std::vector<PaperRecord> kept;
  kept.reserve(survivors.size());
  for (auto& rec : survivors) {
    bool anomalous = false;
    for (const auto& a : rec.authors) {
      if (productivity[{a, rec.year}] > config.productivity_cap) {
        anomalous = true;
        break;
      }
    }
    if (anomalous) {
      ++report.dropped_anomalous_productivity;
    } else {
      kept.push_back(std::move(rec));
    }
  }
  report.kept = kept.size();
  return {std::move(kept), report};
}

CorpusSnapshot build_snapshot(const std::vector<PaperRecord>& records,
                              int cutoff_year) {
  CorpusSnapshot snap;
  snap.cutoff_year = cutoff_year;
  for (const auto& rec : records) {
    if (rec.year > cutoff_year) continue;
    if (!snap.papers.emplace(rec.id, rec).second)
      throw DataError("duplicate paper id " + std::to_string(rec.id));
  }
  for (const auto& [id, rec] : snap.papers) {
    snap.citers[id];  // every snapshot paper gets an entry
    for (std::size_t i = 0; i < rec.authors.size(); ++i)
      snap.author_index[rec.authors[i]].push_back({id, rec.year, static_cast<int>(i)});
    snap.venue_index[rec.venue].push_back(id);
  }
  for (const auto& [id, rec] : snap.papers) {
    for (PaperId ref : rec.references) {
      auto it = snap.citers.find(ref);
      if (it != snap.citers.end()) it->second.push_back(id);
    }
  }
  for (auto& [id, list] : snap.citers) std::sort(list.begin(), list.end());
  return snap;
}

std::size_t citation_count(const CorpusSnapshot& snapshot, PaperId paper_id,
                           int from_year, int to_year) {
  if (from_year > to_year) throw ConfigError("citation_count: from_year > to_year");
  auto it = snapshot.citers.find(paper_id);
  if (it == snapshot.citers.end())
    throw DataError("unknown paper id " + std::to_string(paper_id));
  std::size_t count = 0;
  for (PaperId citer : it->second) {
    const int y = snapshot.papers.at(citer).year;
    if (y >= from_year && y <= to_year) ++count;
  }
  return count;
}

CaseWindow case_window(const std::string& case_label) {
  if (case_label == "1yr") return {2010, 2010, 1};
  if (case_label == "5yr") return {2006, 2006, 5};
  if (case_label == "10yr") return {2001, 2001, 10};
  throw ConfigError("unknown case label '" + case_label + "' (expected 1yr, 5yr or 10yr)");
}

SplitSpec temporal_split(const CorpusSnapshot& snapshot,
                         const std::string& case_label, std::uint64_t seed) {
  return temporal_split(snapshot, case_label, case_window(case_label), seed);
}

SplitSpec temporal_split(const CorpusSnapshot& snapshot,
                         const std::string& case_label,
                         const CaseWindow& window, std::uint64_t seed) {
  std::vector<PaperId> in_window;
  for (const auto& [id, rec] : snapshot.papers)
    if (rec.year >= window.window_start && rec.year <= window.window_end)
      in_window.push_back(id);
  if (in_window.empty())
    throw DataError("temporal_split: no papers in window [" +
                    std::to_string(window.window_start) + ", " +
                    std::to_string(window.window_end) + "]");

  Rng rng(seed);
  rng.shuffle(in_window);

  // 9:1 train/test, ratio of Table-style splits; rounded to the nearest.
  const std::size_t n = in_window.size();
  const std::size_t test_n = (n + 5) / 10;

  SplitSpec spec;
  spec.case_label = case_label;
  spec.window_start = window.window_start;
  spec.window_end = window.window_end;
  spec.horizon_years = window.horizon_years;
  spec.train_ids.assign(in_window.begin(), in_window.end() - static_cast<std::ptrdiff_t>(test_n));
  spec.test_ids.assign(in_window.end() - static_cast<std::ptrdiff_t>(test_n), in_window.end());
  return spec;
}

namespace {

constexpr char kSnapshotMagic[8] = {'C', 'G', 'S', 'N', 'A', 'P', '0', '\0'};
constexpr std::uint32_t kSnapshotVersion = 1;

using namespace citegcn::binio;

}  // namespace

void save_snapshot(const CorpusSnapshot& snapshot, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write snapshot cache: " + path);
  out.write(kSnapshotMagic, 8);
  put_u32(out, kSnapshotVersion);
  put_i64(out, snapshot.cutoff_year);
  put_u64(out, snapshot.papers.size());
  for (const auto& [id, rec] : snapshot.papers) {
    put_i64(out, rec.id);
    put_string(out, rec.title);
    put_string(out, rec.abstract);
    put_u64(out, rec.authors.size());
    for (const auto& a : rec.authors) put_string(out, a);
    put_u64(out, rec.affiliations.size());
    for (const auto& a : rec.affiliations) put_string(out, a);
    put_string(out, rec.venue);
    put_i64(out, rec.year);
    put_u64(out, rec.references.size());
    for (PaperId ref : rec.references) put_i64(out, ref);
  }
  if (!out) throw DataError("write failure: " + path);
}

CorpusSnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open snapshot cache: " + path);
  char magic[8] = {};
  in.read(magic, 8);
  if (!in || !std::equal(magic, magic + 8, kSnapshotMagic))
    throw DataError("not a snapshot cache file: " + path);
  const std::uint32_t version = get_u32(in);
  if (version != kSnapshotVersion)
    throw DataError("unsupported snapshot cache version " + std::to_string(version));
  const int cutoff = static_cast<int>(get_i64(in));
  const std::uint64_t count = get_u64(in);
  std::vector<PaperRecord> records;
  records.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    PaperRecord rec;
    rec.id = get_i64(in);
    rec.title = get_string(in);
    rec.abstract = get_string(in);
    const std::uint64_t na = get_u64(in);
    for (std::uint64_t k = 0; k < na; ++k) rec.authors.push_back(get_string(in));
    const std::uint64_t nf = get_u64(in);
    for (std::uint64_t k = 0; k < nf; ++k) rec.affiliations.push_back(get_string(in));
    rec.venue = get_string(in);
    rec.year = static_cast<int>(get_i64(in));
    const std::uint64_t nr = get_u64(in);
    for (std::uint64_t k = 0; k < nr; ++k) rec.references.push_back(get_i64(in));
    if (!in) throw DataError("truncated snapshot cache: " + path);
    records.push_back(std::move(rec));
  }
  return build_snapshot(records, cutoff);
}

}  // namespace citegcn::corpus
