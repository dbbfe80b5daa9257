#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ecpe/document.hpp"

namespace ecpe::corpus {

/// Token ↔ id mapping. Ids 0 (PAD) and 1 (UNK) are reserved and never
/// assigned to corpus tokens, even if a corpus contains the literal strings
/// used to display them.
class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;

  Vocabulary();
  /// Assigns ids 2, 3, ... to `tokens` in order. Throws on duplicates.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  std::int32_t id(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  bool contains(std::string_view token) const { return index_.contains(std::string(token)); }
  std::size_t size() const { return tokens_.size(); }

  /// Corpus tokens in id order (excluding the reserved entries).
  std::vector<std::string> corpus_tokens() const;

  Document encode(const RawDocument& doc) const;
  std::vector<Document> encode(const std::vector<RawDocument>& docs) const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

/// Tokens with frequency ≥ min_count, ordered by descending frequency with
/// ties broken lexicographically.
Vocabulary build_vocab(const std::vector<RawDocument>& docs, std::size_t min_count = 1);

}  // namespace ecpe::corpus
