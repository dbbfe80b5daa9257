#include "ecpe/document.hpp"

#include <fstream>
#include <sstream>

#include "ecpe/errors.hpp"
#include "json.hpp"

namespace ecpe::corpus {

using nlohmann::json;

template <typename Token>
void validate(const BasicDocument<Token>& doc, std::size_t max_clauses) {
  const std::size_t n = doc.clauses.size();
  auto fail = [&](const std::string& what) { throw ValidationError("document '" + doc.doc_id + "': " + what); };
  if (n == 0) fail("has no clauses");
  if (n > max_clauses) {
    fail("has " + std::to_string(n) + " clauses, more than the limit " + std::to_string(max_clauses));
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (doc.clauses[i].empty()) fail("clause " + std::to_string(i) + " is empty");
  }
  for (std::size_t e : doc.emotions) {
    if (e >= n) fail("emotion index " + std::to_string(e) + " out of range");
  }
  for (std::size_t c : doc.causes) {
    if (c >= n) fail("cause index " + std::to_string(c) + " out of range");
  }
  for (const auto& [e, c] : doc.pairs) {
    const std::string pair = "(" + std::to_string(e) + ", " + std::to_string(c) + ")";
    if (e >= n || c >= n) fail("pair " + pair + " references a clause out of range");
    if (!doc.emotions.contains(e)) fail("pair " + pair + " emotion is not annotated as an emotion clause");
    if (!doc.causes.contains(c)) fail("pair " + pair + " cause is not annotated as a cause clause");
  }
}

template void validate(const RawDocument&, std::size_t);
template void validate(const Document&, std::size_t);

namespace {

std::set<std::size_t> read_indices(const json& arr, const std::string& field) {
  if (!arr.is_array()) throw std::invalid_argument("'" + field + "' must be an array");
  std::set<std::size_t> out;
  for (const json& v : arr) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw std::invalid_argument("'" + field + "' must hold non-negative integers");
    }
    out.insert(v.get<std::size_t>());
  }
  return out;
}

}  // namespace

RawDocument parse_document(const std::string& line, std::size_t line_number, std::size_t max_clauses) {
  RawDocument doc;
  const std::string where = "line " + std::to_string(line_number) + ": ";
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw std::invalid_argument("expected a JSON object");
    if (!j.contains("doc_id") || !j["doc_id"].is_string()) throw std::invalid_argument("'doc_id' must be a string");
    doc.doc_id = j["doc_id"].get<std::string>();
    if (!j.contains("clauses") || !j["clauses"].is_array()) throw std::invalid_argument("'clauses' must be an array");
    for (const json& clause : j["clauses"]) {
      if (!clause.is_array()) throw std::invalid_argument("each clause must be an array of tokens");
      std::vector<std::string> tokens;
      for (const json& tok : clause) {
        if (!tok.is_string()) throw std::invalid_argument("tokens must be strings");
        tokens.push_back(tok.get<std::string>());
      }
      doc.clauses.push_back(std::move(tokens));
    }
    if (j.contains("pairs")) {
      if (!j["pairs"].is_array()) throw std::invalid_argument("'pairs' must be an array");
      for (const json& p : j["pairs"]) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer() ||
            p[0].get<long long>() < 0 || p[1].get<long long>() < 0) {
          throw std::invalid_argument("each pair must be [emotion, cause] with non-negative integers");
        }
        doc.pairs.emplace(p[0].get<std::size_t>(), p[1].get<std::size_t>());
      }
    }
    if (j.contains("emotions")) {
      doc.emotions = read_indices(j["emotions"], "emotions");
    } else {
      for (const auto& pr : doc.pairs) doc.emotions.insert(pr.first);
    }
    if (j.contains("causes")) {
      doc.causes = read_indices(j["causes"], "causes");
    } else {
      for (const auto& pr : doc.pairs) doc.causes.insert(pr.second);
    }
  } catch (const json::exception& e) {
    throw ParseError(where + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + e.what());
  }
  validate(doc, max_clauses);
  return doc;
}

std::vector<RawDocument> read_corpus(std::istream& in, std::size_t max_clauses) {
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    docs.push_back(parse_document(line, line_number, max_clauses));
  }
  return docs;
}

std::vector<RawDocument> load_corpus(const std::filesystem::path& path, std::size_t max_clauses) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path.string() + "'");
  return read_corpus(in, max_clauses);
}

std::string to_json_line(const RawDocument& doc) {
  json j;
  j["doc_id"] = doc.doc_id;
  j["clauses"] = doc.clauses;
  j["emotions"] = std::vector<std::size_t>(doc.emotions.begin(), doc.emotions.end());
  j["causes"] = std::vector<std::size_t>(doc.causes.begin(), doc.causes.end());
  json pairs = json::array();
  for (const auto& [e, c] : doc.pairs) pairs.push_back({e, c});
  j["pairs"] = pairs;
  return j.dump();
}

void write_corpus(const std::filesystem::path& path, const std::vector<RawDocument>& docs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file '" + path.string() + "'");
  for (const RawDocument& d : docs) out << to_json_line(d) << '\n';
}

}  // namespace ecpe::corpus
