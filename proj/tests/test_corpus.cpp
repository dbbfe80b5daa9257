#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "ecpe/batch.hpp"
#include "ecpe/embeddings.hpp"
#include "ecpe/errors.hpp"
#include "ecpe/folds.hpp"
#include "ecpe/synthetic.hpp"
#include "ecpe/vocabulary.hpp"

using namespace ecpe;
using namespace ecpe::corpus;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / ("ecpe_test_" + name);
  std::ofstream(path) << content;
  return path;
}

RawDocument raw(std::string id, std::vector<std::vector<std::string>> clauses, std::set<ClausePair> pairs) {
  RawDocument d;
  d.doc_id = std::move(id);
  d.clauses = std::move(clauses);
  d.pairs = std::move(pairs);
  for (const auto& [e, c] : d.pairs) {
    d.emotions.insert(e);
    d.causes.insert(c);
  }
  return d;
}

struct ProfileStats {
  double single_fraction = 0.0;
  double mean_offset = 0.0;
  std::array<double, 4> buckets{};
  double cause_first = 0.0;
  double mean_clauses = 0.0;
};

ProfileStats profile_stats(const std::vector<RawDocument>& docs) {
  ProfileStats s;
  std::size_t singles = 0;
  std::size_t pairs = 0;
  std::size_t offset_sum = 0;
  std::size_t nonzero = 0;
  std::size_t cause_first = 0;
  std::size_t clauses = 0;
  for (const auto& d : docs) {
    singles += d.pairs.size() == 1;
    clauses += d.clauses.size();
    for (const auto& [e, c] : d.pairs) {
      const std::size_t off = e > c ? e - c : c - e;
      offset_sum += off;
      s.buckets[std::min<std::size_t>(off, 3)] += 1.0;
      ++pairs;
      if (off > 0) {
        ++nonzero;
        cause_first += c < e;
      }
    }
  }
  s.single_fraction = static_cast<double>(singles) / static_cast<double>(docs.size());
  s.mean_offset = static_cast<double>(offset_sum) / static_cast<double>(pairs);
  for (double& b : s.buckets) b /= static_cast<double>(pairs);
  s.cause_first = static_cast<double>(cause_first) / static_cast<double>(nonzero);
  s.mean_clauses = static_cast<double>(clauses) / static_cast<double>(docs.size());
  return s;
}

}  // namespace

TEST_CASE("load_corpus reads the worked example") {
  auto path = temp_file("one.jsonl",
                        R"({"doc_id": "d1", "clauses": [["a"], ["b", "c"], ["d"], ["e", "f"]], "pairs": [[3,1],[3,2]]})"
                        "\n");
  auto docs = load_corpus(path);
  REQUIRE(docs.size() == 1);
  CHECK(docs[0].doc_id == "d1");
  CHECK(docs[0].emotions == std::set<std::size_t>{3});
  CHECK(docs[0].causes == std::set<std::size_t>{1, 2});
  CHECK(docs[0].pairs == std::set<ClausePair>{{3, 1}, {3, 2}});
}

TEST_CASE("load_corpus edge cases") {
  CHECK(load_corpus(temp_file("empty.jsonl", "")).empty());

  auto bad_index = temp_file("bad_index.jsonl",
                             R"({"doc_id": "x9", "clauses": [["a"], ["b"], ["c"], ["d"]], "pairs": [[9,1]]})"
                             "\n");
  try {
    load_corpus(bad_index);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("x9") != std::string::npos);
  }

  auto malformed = temp_file("malformed.jsonl",
                             R"({"doc_id": "ok", "clauses": [["a"]], "pairs": []})"
                             "\n{not json\n");
  try {
    load_corpus(malformed);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  auto inconsistent = temp_file("inconsistent.jsonl",
                                R"({"doc_id": "inc", "clauses": [["a"], ["b"]], "emotions": [0], "causes": [0], "pairs": [[0,1]]})"
                                "\n");
  CHECK_THROWS_AS(load_corpus(inconsistent), ValidationError);

  auto empty_clause = temp_file("empty_clause.jsonl", R"({"doc_id": "e", "clauses": [["a"], []], "pairs": []})"
                                                      "\n");
  CHECK_THROWS_AS(load_corpus(empty_clause), ValidationError);

  std::string long_doc = R"({"doc_id": "long", "clauses": [)";
  for (int i = 0; i < 76; ++i) long_doc += std::string(i ? "," : "") + R"(["w"])";
  long_doc += "]}\n";
  CHECK_THROWS_AS(load_corpus(temp_file("long.jsonl", long_doc)), ValidationError);
}

TEST_CASE("corpus files round-trip through write_corpus") {
  auto docs = gen_synthetic(25, 3);
  auto path = std::filesystem::temp_directory_path() / "ecpe_test_roundtrip.jsonl";
  write_corpus(path, docs);
  auto back = load_corpus(path);
  REQUIRE(back.size() == docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    CHECK(back[i].doc_id == docs[i].doc_id);
    CHECK(back[i].clauses == docs[i].clauses);
    CHECK(back[i].pairs == docs[i].pairs);
    CHECK(back[i].emotions == docs[i].emotions);
    CHECK(back[i].causes == docs[i].causes);
  }
}

TEST_CASE("build_vocab orders by frequency then lexicographically") {
  std::vector<RawDocument> docs{raw("d", {{"b", "a", "a"}}, {})};
  Vocabulary v = build_vocab(docs, 1);
  CHECK(v.id("a") == 2);
  CHECK(v.id("b") == 3);
  CHECK(v.size() == 4);

  Vocabulary cut = build_vocab(docs, 2);
  CHECK(cut.id("a") == 2);
  CHECK(cut.id("b") == Vocabulary::kUnk);

  std::vector<RawDocument> ties{raw("t", {{"z", "y", "x"}}, {})};
  Vocabulary t1 = build_vocab(ties, 1);
  Vocabulary t2 = build_vocab(ties, 1);
  CHECK(t1.corpus_tokens() == std::vector<std::string>{"x", "y", "z"});
  CHECK(t1.corpus_tokens() == t2.corpus_tokens());

  CHECK_THROWS_AS(build_vocab(docs, 0), ParameterError);
}

TEST_CASE("reserved ids never collide with corpus tokens") {
  std::vector<RawDocument> docs{raw("d", {{"<pad>", "<unk>", "w"}}, {})};
  Vocabulary v = build_vocab(docs, 1);
  CHECK(v.id("<pad>") >= 2);
  CHECK(v.id("<unk>") >= 2);
  CHECK(v.id("never-seen") == Vocabulary::kUnk);
  std::set<std::int32_t> ids;
  for (const auto& tok : v.corpus_tokens()) ids.insert(v.id(tok));
  CHECK(ids.size() == 3);
  CHECK(!ids.contains(Vocabulary::kPad));
  CHECK(!ids.contains(Vocabulary::kUnk));
}

TEST_CASE("vocabulary save and load") {
  Vocabulary v = Vocabulary::from_tokens({"alpha", "beta gamma", "\"q\""});
  auto path = std::filesystem::temp_directory_path() / "ecpe_test_vocab.json";
  v.save(path);
  Vocabulary back = Vocabulary::load(path);
  CHECK(back.corpus_tokens() == v.corpus_tokens());
  CHECK(back.id("beta gamma") == 3);
}

TEST_CASE("load_embeddings") {
  Vocabulary v = Vocabulary::from_tokens({"a", "b"});
  Rng rng(1);
  auto full = temp_file("emb_full.txt", "2 3\na 1 2 3\nb -1 -2 -3.5\n");
  EmbeddingTable t = load_embeddings(full, v, 3, rng);
  CHECK(t.covered == 2);
  CHECK(t.matrix.shape() == ad::Shape{4, 3});
  for (std::size_t k = 0; k < 3; ++k) CHECK(t.matrix.at(0, k) == 0.0);
  CHECK(t.matrix.at(2, 0) == 1.0);
  CHECK(t.matrix.at(3, 2) == -3.5);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::abs(t.matrix.at(1, k)) < 0.1);
    CHECK(t.matrix.at(1, k) != 0.0);
  }

  auto wrong_dim = temp_file("emb_dim.txt", "1 50\n");
  CHECK_THROWS_AS(load_embeddings(wrong_dim, v, 200, rng), FormatError);

  auto bad_number = temp_file("emb_num.txt", "1 2\na 0.5 x1\n");
  try {
    load_embeddings(bad_number, v, 2, rng);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  auto missing = std::filesystem::temp_directory_path() / "ecpe_test_does_not_exist.txt";
  EmbeddingTable fallback = load_embeddings(missing, v, 5, rng, true);
  CHECK(fallback.covered == 0);
  for (std::size_t r = 1; r < 4; ++r) {
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(fallback.matrix.at(r, k) >= -0.1);
      CHECK(fallback.matrix.at(r, k) < 0.1);
    }
  }
  CHECK_THROWS_AS(load_embeddings(missing, v, 5, rng, false), Error);
}

TEST_CASE("make_folds") {
  std::vector<std::string> ids;
  for (int i = 0; i < 20; ++i) ids.push_back("d" + std::to_string(i));
  FoldSplit split = make_folds(ids, 10, 7);
  REQUIRE(split.folds.size() == 10);
  std::multiset<std::string> all;
  for (const Fold& f : split.folds) {
    CHECK(f.assigned.size() == 2);
    all.insert(f.assigned.begin(), f.assigned.end());
    std::set<std::string> train(f.train_ids.begin(), f.train_ids.end());
    for (const auto& t : f.test_ids) CHECK(!train.contains(t));
    CHECK(f.train_ids.size() + f.test_ids.size() == f.assigned.size());
  }
  CHECK(all.size() == 20);
  CHECK(std::set<std::string>(all.begin(), all.end()).size() == 20);

  FoldSplit again = make_folds(ids, 10, 7);
  for (std::size_t f = 0; f < 10; ++f) CHECK(again.folds[f].assigned == split.folds[f].assigned);

  CHECK_THROWS_AS(make_folds(ids, 21, 7), ParameterError);

  FoldSplit standard = make_folds(ids, 4, 3, SplitMode::standard);
  for (const Fold& f : standard.folds) {
    CHECK(f.test_ids == f.assigned);
    CHECK(f.train_ids.size() == 15);
  }

  std::vector<std::string> hundred;
  for (int i = 0; i < 100; ++i) hundred.push_back("h" + std::to_string(i));
  FoldSplit literal = make_folds(hundred, 2, 1);
  CHECK(literal.folds[0].train_ids.size() == 45);
  CHECK(literal.folds[0].test_ids.size() == 5);
}

TEST_CASE("gen_synthetic matches the NEWS profile on 1000 documents") {
  auto docs = gen_synthetic(1000, 11);
  for (const auto& d : docs) CHECK_NOTHROW(validate(d));
  ProfileStats s = profile_stats(docs);
  CHECK(std::abs(s.single_fraction - 0.83) <= 0.04);
  CHECK(std::abs(s.mean_offset - 1.0) <= 0.15);
  CHECK(s.cause_first > 0.5);
  CHECK(std::abs(s.mean_clauses - 14.0) < 0.5);

  auto again = gen_synthetic(1000, 11);
  for (std::size_t i = 0; i < docs.size(); ++i) CHECK(again[i].clauses == docs[i].clauses);
}

TEST_CASE("gen_synthetic offset buckets on 10^4 documents") {
  ProfileStats s = profile_stats(gen_synthetic(10000, 5));
  const std::array<double, 4> expected{0.24, 0.62, 0.10, 0.04};
  for (std::size_t b = 0; b < 4; ++b) {
    CAPTURE(b);
    CHECK(std::abs(s.buckets[b] - expected[b]) <= 0.04);
  }
}

TEST_CASE("gen_synthetic plants markers on gold clauses") {
  for (const auto& d : gen_synthetic(50, 2)) {
    for (std::size_t i = 0; i < d.clauses.size(); ++i) {
      bool emo = false;
      bool cau = false;
      for (const auto& tok : d.clauses[i]) {
        emo = emo || tok.rfind("emo", 0) == 0;
        cau = cau || tok.rfind("cau", 0) == 0;
      }
      CHECK(emo == d.emotions.contains(i));
      CHECK(cau == d.causes.contains(i));
    }
  }
}

TEST_CASE("make_batch examples") {
  Document one;
  one.doc_id = "one";
  one.clauses = {{5}, {6, 7}};
  one.emotions = {1};
  one.causes = {0};
  one.pairs = {{1, 0}};
  std::vector<Document> single{one};
  Batch b = make_batch(single);
  CHECK(b.max_clauses == 2);
  CHECK(b.pair_labels == std::vector<std::uint8_t>{0, 0, 1, 0});

  Document three;
  three.doc_id = "three";
  three.clauses = {{2}, {3}, {4, 4, 4}};
  three.emotions = {2};
  three.causes = {1, 2};
  three.pairs = {{2, 1}, {2, 2}};
  std::vector<Document> both{one, three};
  Batch bb = make_batch(both);
  CHECK(bb.max_clauses == 3);
  CHECK(bb.max_tokens == 3);
  CHECK(std::vector<std::uint8_t>(bb.clause_mask.begin(), bb.clause_mask.begin() + 3) ==
        std::vector<std::uint8_t>{1, 1, 0});
  CHECK(std::vector<std::uint8_t>(bb.clause_mask.begin() + 3, bb.clause_mask.end()) ==
        std::vector<std::uint8_t>{1, 1, 1});
  std::size_t total = 0;
  for (auto y : bb.pair_labels) total += y;
  CHECK(total == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(bb.tokens[bb.token_index(0, 2, t)] == Vocabulary::kPad);
    CHECK(bb.token_mask[bb.token_index(0, 2, t)] == 0);
  }
  CHECK(bb.tokens[bb.token_index(0, 0, 1)] == Vocabulary::kPad);
}

TEST_CASE("property: batching round-trips and Y is zero off the mask") {
  auto raw_docs = gen_synthetic(64, 9);
  Vocabulary vocab = build_vocab(raw_docs, 1);
  auto docs = vocab.encode(raw_docs);
  for (std::size_t start = 0; start < docs.size(); start += 7) {
    const std::size_t n = std::min<std::size_t>(7, docs.size() - start);
    std::span<const Document> slice(docs.data() + start, n);
    Batch b = make_batch(slice);
    auto back = unbatch(b);
    std::size_t gold = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(back[i].clauses == slice[i].clauses);
      CHECK(back[i].emotions == slice[i].emotions);
      CHECK(back[i].causes == slice[i].causes);
      CHECK(back[i].pairs == slice[i].pairs);
      gold += slice[i].pairs.size();
    }
    std::size_t total = 0;
    for (std::size_t d = 0; d < n; ++d) {
      for (std::size_t p = 0; p < b.max_clauses; ++p) {
        for (std::size_t q = 0; q < b.max_clauses; ++q) {
          const auto y = b.pair_labels[b.pair_index(d, p, q)];
          CHECK(y <= 1);
          total += y;
          if (!b.clause_mask[b.clause_index(d, p)] || !b.clause_mask[b.clause_index(d, q)]) CHECK(y == 0);
        }
      }
    }
    CHECK(total == gold);
  }
}

TEST_CASE("hard_filter keeps single-pair documents") {
  std::vector<RawDocument> docs{raw("a", {{"x"}, {"y"}}, {{1, 0}}), raw("b", {{"x"}, {"y"}}, {{1, 0}, {1, 1}}),
                                raw("c", {{"x"}}, {{0, 0}})};
  auto kept = hard_filter(docs);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].doc_id == "a");
  CHECK(kept[1].doc_id == "c");
  CHECK(hard_filter(kept).size() == 2);
}
