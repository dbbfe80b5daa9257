#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ecpe/errors.hpp"
#include "ecpe/evaluate.hpp"
#include "ecpe/synthetic.hpp"
#include "ecpe/vocabulary.hpp"
#include "test_support.hpp"

using namespace ecpe;
using namespace ecpe::eval;
using ecpe::testing::random_tensor;

namespace {

std::vector<corpus::Document> synthetic_docs(std::size_t n, std::uint64_t seed, std::size_t& vocab_size) {
  auto raw = corpus::gen_synthetic(n, seed);
  auto vocab = corpus::build_vocab(raw);
  vocab_size = vocab.size();
  return vocab.encode(raw);
}

net::ModelConfig small_config(std::size_t vocab) {
  net::ModelConfig c;
  c.vocab_size = vocab;
  c.embedding_dim = 8;
  c.kernel_sizes = {2, 3};
  c.filters = 4;
  c.hidden = 8;
  c.projection = 6;
  return c;
}

// Independent enumeration of the threshold rule.
PairSet brute_force(const ad::Tensor& m, double eta, std::size_t c) {
  PairSet out;
  const auto v = m.values();
  for (std::size_t i = 0; i < c * c; ++i) {
    const std::size_t p = i / c;
    const std::size_t q = i % c;
    if (!(v[p * m.cols() + q] <= eta)) out.insert({p, q});
  }
  return out;
}

template <typename T>
std::map<std::string, std::set<T>> one_doc(std::set<T> s) {
  return {{"d", std::move(s)}};
}

double seconds_of(const std::function<void()>& f, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

TEST_CASE("decode_pairs examples") {
  ad::Tensor half({2, 2}, std::vector<double>(4, 0.5));
  CHECK(decode_pairs(half, 0.3, 2) == PairSet{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  CHECK(decode_pairs(half, 0.5, 2).empty());
  // Rows are emotions, columns causes.
  ad::Tensor m({3, 3}, {0, 0, 0, 0.9, 0, 0, 0, 0, 0});
  CHECK(decode_pairs(m, 0.3, 3) == PairSet{{1, 0}});
  // Entries past the true length are ignored.
  ad::Tensor padded({3, 3}, std::vector<double>(9, 0.9));
  CHECK(decode_pairs(padded, 0.3, 2).size() == 4);
  CHECK_THROWS_AS(decode_pairs(half, 0.0, 2), ParameterError);
  CHECK_THROWS_AS(decode_pairs(half, 1.0, 2), ParameterError);
}

TEST_CASE("decode_pairs nesting and brute-force equivalence") {
  Rng rng(21);
  for (std::size_t c = 1; c <= 4; ++c) {
    for (int trial = 0; trial < 100; ++trial) {
      ad::Tensor m = random_tensor({c, c}, rng, 0.0, 1.0, false);
      // Plant exact ties with the thresholds.
      if (trial % 5 == 0) m[0] = 0.3;
      for (double eta : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.9}) CHECK(decode_pairs(m, eta, c) == brute_force(m, eta, c));
      PairSet low = decode_pairs(m, 0.2, c);
      PairSet high = decode_pairs(m, 0.6, c);
      CHECK(std::includes(low.begin(), low.end(), high.begin(), high.end()));
    }
  }
}

TEST_CASE("decode_aux examples") {
  CHECK(decode_aux(ad::Tensor({2, 2}, {0.9, 0.1, 0.2, 0.8})) == IndexSet{1});
  CHECK(decode_aux(ad::Tensor({3, 2}, std::vector<double>(6, 0.5))).empty());

  // Invariant under strictly monotone maps of the logits.
  Rng rng(4);
  ad::Tape tape;
  ad::Tensor logits = random_tensor({6, 2}, rng, -3, 3, false);
  ad::Tensor warped = logits;
  for (double& v : warped.values()) v = std::exp(v) * 2.0 - 1.0;
  CHECK(decode_aux(ad::softmax_rows(tape.constant(logits)).value()) ==
        decode_aux(ad::softmax_rows(tape.constant(warped)).value()));
}

TEST_CASE("prf1 examples") {
  const double p = 0.6478;
  const double r = 0.6105;
  const double f = f1_score(p, r);
  CHECK(f == doctest::Approx(0.6286).epsilon(1e-4));
  CHECK(std::abs(f - 0.6280) <= 1e-3);

  PairSet gold{{3, 1}, {3, 2}};
  Metrics perfect = prf1(one_doc(gold), one_doc(gold));
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);

  Metrics none = prf1(one_doc(PairSet{}), one_doc(gold));
  CHECK(none.precision == 0.0);
  CHECK(none.recall == 0.0);
  CHECK(none.f1 == 0.0);
  CHECK(none.fn == 2);

  std::map<std::string, IndexSet> other{{"x", {}}};
  CHECK_THROWS_AS(prf1(other, std::map<std::string, IndexSet>{{"y", {}}}), ContractError);
}

TEST_CASE("prf1 micro and macro aggregation") {
  std::map<std::string, IndexSet> pred{{"a", {0, 1}}, {"b", {2}}};
  std::map<std::string, IndexSet> gold{{"a", {0}}, {"b", {2, 3, 4}}};
  Metrics micro = prf1(pred, gold);
  CHECK(micro.tp == 2);
  CHECK(micro.fp == 1);
  CHECK(micro.fn == 2);
  CHECK(micro.precision == doctest::Approx(2.0 / 3.0));
  CHECK(micro.recall == doctest::Approx(0.5));
  Metrics macro = prf1(pred, gold, Averaging::macro);
  CHECK(macro.precision == doctest::Approx((0.5 + 1.0) / 2.0));
  CHECK(macro.recall == doctest::Approx((1.0 + 1.0 / 3.0) / 2.0));
  CHECK(macro.tp == micro.tp);
}

TEST_CASE("harmonic-mean identity on random counts") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const std::size_t tp = rng.below(50), fp = rng.below(50), fn = rng.below(50);
    Metrics m = from_counts(tp, fp, fn);
    if (m.precision > 0.0 && m.recall > 0.0) {
      CHECK(m.f1 == 2.0 * m.precision * m.recall / (m.precision + m.recall));
      CHECK(std::abs(1.0 / m.f1 - 0.5 * (1.0 / m.precision + 1.0 / m.recall)) < 1e-12);
    } else {
      CHECK(m.f1 == 0.0);
    }
    CHECK(m.precision == (tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0));
  }
}

TEST_CASE("evaluation is pure and the sweep is nested") {
  std::size_t vocab = 0;
  auto docs = synthetic_docs(12, 31, vocab);
  Rng rng(3);
  net::Parameters p = net::init_params(small_config(vocab), rng);
  train::TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 4;
  p = train::train(p, docs, tc).params;

  CHECK(evaluate(p, docs) == evaluate(p, docs));

  const double etas[] = {0.2, 0.3, 0.4, 0.5, 0.6};
  auto rows = threshold_sweep(p, docs, etas);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].pair.recall <= rows[i - 1].pair.recall);
    CHECK(rows[i].predicted <= rows[i - 1].predicted);
  }
  EvalOptions at03;
  CHECK(rows[1].pair == evaluate(p, docs, at03).pair);

  const std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("eta,precision,recall,f1\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);

  const double unsorted[] = {0.4, 0.3};
  CHECK_THROWS_AS(threshold_sweep(p, docs, unsorted), ParameterError);

  // The published recall column falls monotonically too.
  const double paper_recall[] = {0.6456, 0.6105, 0.5846, 0.5604, 0.5385};
  for (std::size_t i = 1; i < 5; ++i) CHECK(paper_recall[i] <= paper_recall[i - 1]);
}

TEST_CASE("predictions stay inside each document") {
  std::size_t vocab = 0;
  auto docs = synthetic_docs(6, 32, vocab);
  Rng rng(8);
  net::Parameters p = net::init_params(small_config(vocab), rng);
  EvalOptions low;
  low.eta = 0.01;
  for (const auto& pred : predict(p, docs, low)) {
    for (auto [e, c] : pred.pairs) {
      CHECK(e < pred.length);
      CHECK(c < pred.length);
    }
    for (auto i : pred.emotions) CHECK(i < pred.length);
  }
}

TEST_CASE("cross_validate structure and determinism") {
  std::size_t vocab = 0;
  auto docs = synthetic_docs(40, 33, vocab);
  CrossValidationConfig c;
  c.folds = 2;
  c.model = small_config(vocab);
  c.train.epochs = 1;
  c.train.batch_size = 8;
  c.seed = 5;
  CrossValidationResult a = cross_validate(docs, c);
  REQUIRE(a.folds.size() == 2);
  for (const auto& f : a.folds) {
    CHECK(f.train_docs == 18);
    CHECK(f.test_docs == 2);
  }
  CHECK(std::abs(a.mean.pair.f1 - (a.folds[0].metrics.pair.f1 + a.folds[1].metrics.pair.f1) / 2.0) <= 1e-12);

  c.jobs = 2;
  CrossValidationResult b = cross_validate(docs, c);
  for (std::size_t k = 0; k < 2; ++k) CHECK(a.folds[k].metrics == b.folds[k].metrics);

  c.mode = corpus::SplitMode::standard;
  CrossValidationResult s = cross_validate(docs, c);
  CHECK(s.folds[0].train_docs == 20);
  CHECK(s.folds[0].test_docs == 20);
}

TEST_CASE("epoch timing") {
  std::size_t vocab = 0;
  auto docs = synthetic_docs(32, 34, vocab);
  Rng rng(9);
  net::Parameters p = net::init_params(small_config(vocab), rng);
  train::TrainConfig tc;
  tc.epochs = 2;
  auto log = train::train(p, docs, tc).log;
  REQUIRE(log.epochs.size() == 2);
  for (const auto& e : log.epochs) CHECK(e.seconds > 0.0);

  // Doubling the document count roughly doubles the epoch.
  const std::vector<corpus::Document> half(docs.begin(), docs.begin() + 16);
  const double t_half = seconds_of([&] { time_epoch(p, half, tc); }, 3);
  const double t_full = seconds_of([&] { time_epoch(p, docs, tc); }, 3);
  const double ratio = t_full / t_half;
  INFO("ratio " << ratio);
  CHECK(ratio >= 1.0);
  CHECK(ratio <= 4.0);
}

TEST_CASE("biaffine stage scales quadratically in clause count") {
  Rng rng(10);
  const std::size_t dz = 100;
  auto run = [&](std::size_t c) {
    ad::Tensor ze = random_tensor({c, dz}, rng, -1, 1, false);
    ad::Tensor zc = random_tensor({c, dz}, rng, -1, 1, false);
    return seconds_of(
        [&] {
          for (int rep = 0; rep < 20; ++rep) {
            ad::Tape t;
            // Pair matrix and its sigmoid only; the projection is linear in C.
            ad::sigmoid(ad::matmul(t.constant(ze), ad::transpose(t.constant(zc))));
          }
        },
        5);
  };
  const double ratio = run(256) / run(128);
  INFO("ratio " << ratio);
  CHECK(ratio >= 2.0);
  CHECK(ratio <= 8.0);
}
