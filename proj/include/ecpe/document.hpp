#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ecpe::corpus {

/// Directed link (emotion clause index, cause clause index), 0-based.
using ClausePair = std::pair<std::size_t, std::size_t>;

inline constexpr std::size_t kDefaultMaxClauses = 75;

/// A clause-segmented document with gold annotations. Token is std::string
/// for documents as read from disk and a vocabulary id once encoded.
template <typename Token>
struct BasicDocument {
  std::string doc_id;
  std::vector<std::vector<Token>> clauses;
  std::set<std::size_t> emotions;
  std::set<std::size_t> causes;
  std::set<ClausePair> pairs;

  std::size_t size() const { return clauses.size(); }
};

using RawDocument = BasicDocument<std::string>;
using Document = BasicDocument<std::int32_t>;

/// Checks the document invariants: 1 ≤ clauses ≤ max_clauses, non-empty
/// clauses, gold indices in range, and every pair's ends present in the
/// emotion/cause sets. Throws ValidationError naming the doc_id.
template <typename Token>
void validate(const BasicDocument<Token>& doc, std::size_t max_clauses = kDefaultMaxClauses);

/// Parses one JSONL document (see README for the schema). When "emotions"
/// or "causes" are absent they are derived from "pairs".
RawDocument parse_document(const std::string& line, std::size_t line_number,
                           std::size_t max_clauses = kDefaultMaxClauses);

std::vector<RawDocument> read_corpus(std::istream& in, std::size_t max_clauses = kDefaultMaxClauses);
std::vector<RawDocument> load_corpus(const std::filesystem::path& path,
                                     std::size_t max_clauses = kDefaultMaxClauses);

std::string to_json_line(const RawDocument& doc);
void write_corpus(const std::filesystem::path& path, const std::vector<RawDocument>& docs);

/// Keeps documents with exactly one gold pair.
template <typename Token>
std::vector<BasicDocument<Token>> hard_filter(const std::vector<BasicDocument<Token>>& docs) {
  std::vector<BasicDocument<Token>> kept;
  for (const auto& d : docs) {
    if (d.pairs.size() == 1) kept.push_back(d);
  }
  return kept;
}

}  // namespace ecpe::corpus
