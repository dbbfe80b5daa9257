#include "ecpe/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ecpe/errors.hpp"

namespace ecpe::corpus {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

EmbeddingTable random_embeddings(const Vocabulary& vocab, std::size_t dim, Rng& rng) {
  if (dim == 0) throw ParameterError("embeddings: dimension must be positive");
  EmbeddingTable table{ad::Tensor({vocab.size(), dim}), 0};
  auto values = table.matrix.values();
  for (std::size_t i = dim; i < values.size(); ++i) values[i] = rng.uniform(-kEmbeddingInitBound, kEmbeddingInitBound);
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, std::size_t dim, Rng& rng,
                               bool allow_random) {
  EmbeddingTable table = random_embeddings(vocab, dim, rng);
  std::ifstream in(path);
  if (!in) {
    if (allow_random) return table;
    throw Error("cannot open embedding file '" + path.string() + "'");
  }
  const std::string where = "embedding file '" + path.string() + "' line ";
  std::string line;
  if (!std::getline(in, line)) throw FormatError(where + "1: missing header");
  auto header = split_spaces(line);
  std::size_t count = 0;
  std::size_t declared = 0;
  if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], declared)) {
    throw ParseError(where + "1: header must be '<count> <dim>'");
  }
  if (declared != dim) {
    throw FormatError(where + "1: declared dimension " + std::to_string(declared) + " differs from d_e = " +
                      std::to_string(dim));
  }
  std::size_t line_number = 1;
  std::size_t vectors = 0;
  auto values = table.matrix.values();
  while (std::getline(in, line)) {
    ++line_number;
    auto fields = split_spaces(line);
    if (fields.empty()) continue;
    ++vectors;
    if (fields.size() != dim + 1) {
      throw FormatError(where + std::to_string(line_number) + ": expected " + std::to_string(dim) + " values, got " +
                        std::to_string(fields.size() - 1));
    }
    std::vector<double> row(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_number(fields[k + 1], row[k])) {
        throw ParseError(where + std::to_string(line_number) + ": cannot parse '" + std::string(fields[k + 1]) + "'");
      }
    }
    const std::int32_t id = vocab.id(fields[0]);
    if (id == Vocabulary::kUnk || id == Vocabulary::kPad || !vocab.contains(fields[0])) continue;
    std::copy(row.begin(), row.end(), values.begin() + static_cast<std::ptrdiff_t>(id) * static_cast<std::ptrdiff_t>(dim));
    ++table.covered;
  }
  if (vectors != count) {
    throw FormatError(where + "1: header declares " + std::to_string(count) + " vectors, file holds " +
                      std::to_string(vectors));
  }
  return table;
}

}  // namespace ecpe::corpus
