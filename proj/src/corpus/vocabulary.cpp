#include "ecpe/vocabulary.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "ecpe/errors.hpp"
#include "json.hpp"

namespace ecpe::corpus {

Vocabulary::Vocabulary() : tokens_{"<pad>", "<unk>"} {}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  for (const std::string& tok : tokens) {
    const auto id = static_cast<std::int32_t>(v.tokens_.size());
    if (!v.index_.emplace(tok, id).second) throw ValidationError("vocabulary: duplicate token '" + tok + "'");
    v.tokens_.push_back(tok);
  }
  return v;
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw IndexError("vocabulary: id " + std::to_string(id) + " out of range");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<std::string> Vocabulary::corpus_tokens() const { return {tokens_.begin() + 2, tokens_.end()}; }

Document Vocabulary::encode(const RawDocument& doc) const {
  Document out;
  out.doc_id = doc.doc_id;
  out.emotions = doc.emotions;
  out.causes = doc.causes;
  out.pairs = doc.pairs;
  out.clauses.reserve(doc.clauses.size());
  for (const auto& clause : doc.clauses) {
    std::vector<std::int32_t> ids;
    ids.reserve(clause.size());
    for (const std::string& tok : clause) ids.push_back(id(tok));
    out.clauses.push_back(std::move(ids));
  }
  return out;
}

std::vector<Document> Vocabulary::encode(const std::vector<RawDocument>& docs) const {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const RawDocument& d : docs) out.push_back(encode(d));
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vocabulary '" + path.string() + "'");
  out << nlohmann::json(corpus_tokens()).dump() << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vocabulary '" + path.string() + "'");
  try {
    return from_tokens(nlohmann::json::parse(in).get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("vocabulary '" + path.string() + "': " + e.what());
  }
}

Vocabulary build_vocab(const std::vector<RawDocument>& docs, std::size_t min_count) {
  if (min_count == 0) throw ParameterError("build_vocab: min_count must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const RawDocument& d : docs) {
    for (const auto& clause : d.clauses) {
      for (const std::string& tok : clause) ++counts[tok];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& entry : counts) {
    if (entry.second >= min_count) kept.push_back(entry);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& entry : kept) tokens.push_back(std::move(entry.first));
  return Vocabulary::from_tokens(tokens);
}

}  // namespace ecpe::corpus
