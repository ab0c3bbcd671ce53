#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace citegcn::corpus {

using PaperId = std::int64_t;

struct PaperRecord {
  PaperId id = -1;
  std::string title;
  std::string abstract;
  std::vector<std::string> authors;
  std::vector<std::string> affiliations;  // aligned to authors after clean()
  std::string venue;
  int year = 0;
  std::vector<PaperId> references;  // deduplicated, never the paper's own id

  bool operator==(const PaperRecord&) const = default;
};

struct ParseDiagnostic {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<PaperRecord> records;
  std::vector<ParseDiagnostic> diagnostics;
};

// AMiner v1 plain text: records separated by blank lines, fields given by
// line prefixes #index, #*, #@, #o, #t, #c, #%, #!. A record with a missing
// or unparseable id or year is reported and skipped; field-level anomalies
// (duplicate or self references, stray lines) are reported and repaired.
ParseResult parse_aminer(std::istream& in);

// JSON-Lines mirror of the same fields, one object per line.
ParseResult parse_jsonl(std::istream& in);

// Sniffs gzip and JSONL-vs-AMiner, then dispatches.
ParseResult parse_records_file(const std::string& path);
ParseResult parse_records_text(const std::string& text);

void write_aminer(const std::vector<PaperRecord>& records, std::ostream& out);
void write_jsonl(const std::vector<PaperRecord>& records, std::ostream& out);

struct CleanReport {
  std::size_t input_records = 0;
  std::size_t kept = 0;
  std::size_t dropped_missing_author = 0;
  std::size_t dropped_missing_venue = 0;
  std::size_t dropped_anomalous_productivity = 0;

  std::string to_json() const;
};

struct CleanConfig {
  // Max records one author may have in a single calendar year; exceeding it
  // drops that author's records for that year only.
  std::size_t productivity_cap = 1000;
  std::string missing_affiliation = "NaN";
};

std::pair<std::vector<PaperRecord>, CleanReport> clean(
    const std::vector<PaperRecord>& records, const CleanConfig& config = {});

struct AuthorPaperRef {
  PaperId paper_id = -1;
  int year = 0;
  int position = 0;  // 0-based position in the author list
};

// Immutable once built; read-only queries are safe to share across threads.
struct CorpusSnapshot {
  int cutoff_year = 0;
  std::map<PaperId, PaperRecord> papers;
  std::map<PaperId, std::vector<PaperId>> citers;  // sorted citing ids
  std::map<std::string, std::vector<AuthorPaperRef>> author_index;
  std::map<std::string, std::vector<PaperId>> venue_index;

  bool contains(PaperId id) const { return papers.count(id) != 0; }
};

// Keeps records with year <= cutoff_year and inverts their reference lists.
// References to ids outside the snapshot stay on the record but create no
// citer entry. Duplicate ids are a data error.
CorpusSnapshot build_snapshot(const std::vector<PaperRecord>& records,
                              int cutoff_year);

// |{d' in citers(paper_id) : from_year <= year(d') <= to_year}|.
std::size_t citation_count(const CorpusSnapshot& snapshot, PaperId paper_id,
                           int from_year, int to_year);

struct SplitSpec {
  std::string case_label;
  int window_start = 0;
  int window_end = 0;
  int horizon_years = 0;
  std::vector<PaperId> train_ids;
  std::vector<PaperId> test_ids;
};

struct CaseWindow {
  int window_start = 0;
  int window_end = 0;
  int horizon_years = 0;
};

// Default windows for the labels 1yr / 5yr / 10yr.
CaseWindow case_window(const std::string& case_label);

// Shuffles the papers published inside the window and splits them 9:1.
SplitSpec temporal_split(const CorpusSnapshot& snapshot,
                         const std::string& case_label, std::uint64_t seed);
SplitSpec temporal_split(const CorpusSnapshot& snapshot,
                         const std::string& case_label,
                         const CaseWindow& window, std::uint64_t seed);

// Binary cache with a format-version header.
void save_snapshot(const CorpusSnapshot& snapshot, const std::string& path);
CorpusSnapshot load_snapshot(const std::string& path);

}  // namespace citegcn::corpus
