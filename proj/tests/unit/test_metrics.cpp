#include <gtest/gtest.h>

#include <set>

#include "mmfc/error.hpp"
#include "mmfc/metrics.hpp"
#include "support.hpp"

using namespace mmfc;
using namespace mmfc::eval;
using verifier::VeracityPrediction;

namespace {

using L = VeracityLabel;

// Per-class F1 from explicit confusion counting.
double oracle_macro(const std::vector<L>& p, const std::vector<L>& g) {
  std::set<int> classes;
  for (auto x : p) classes.insert(code(x));
  for (auto x : g) classes.insert(code(x));
  double sum = 0.0;
  for (int c : classes) {
    int tp = 0, pred_c = 0, gold_c = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      pred_c += code(p[i]) == c;
      gold_c += code(g[i]) == c;
      tp += code(p[i]) == c && code(g[i]) == c;
    }
    const double prec = pred_c ? static_cast<double>(tp) / pred_c : 0.0;
    const double rec = gold_c ? static_cast<double>(tp) / gold_c : 0.0;
    sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
  }
  return 100.0 * sum / static_cast<double>(classes.size());
}

double oracle_accuracy(const std::vector<L>& p, const std::vector<L>& g) {
  int right = 0;
  for (std::size_t i = 0; i < p.size(); ++i) right += p[i] == g[i];
  return 100.0 * right / static_cast<double>(p.size());
}

}  // namespace

TEST(MapPrediction, BruteForceAgainstRule) {
  Rng rng(12);
  for (int i = 0; i < 5000; ++i) {
    VeracityPrediction pred;
    double a = rng.uniform(), b = rng.uniform(), c = rng.uniform();
    if (i % 10 == 0) b = a;  // exercise ties
    const double s = a + b + c;
    pred.probs = {a / s, b / s, c / s};
    pred.label = label_from_code(static_cast<int>(rng.below(3)));
    const auto got = map_prediction(pred, LabelSpace::binary());
    if (pred.label != L::nei) {
      EXPECT_EQ(got, pred.label);
    } else {
      // Enumerate the binary classes and keep the first maximal one.
      L best = L::supported;
      double best_p = -1;
      for (L cand : {L::supported, L::refuted})
        if (pred.probs[code(cand)] > best_p) best_p = pred.probs[code(cand)], best = cand;
      EXPECT_EQ(got, best);
    }
    EXPECT_EQ(map_prediction(pred, LabelSpace::ternary()), pred.label);
  }
}

TEST(MapPrediction, NeiWithoutProbsThrows) {
  VeracityPrediction pred;
  pred.label = L::nei;
  EXPECT_THROW(map_prediction(pred, LabelSpace::binary()), MissingProbs);
  EXPECT_EQ(map_prediction(pred, LabelSpace::ternary()), L::nei);
}

TEST(F1, HandComputedConfusion) {
  // gold: S S S R R N ; pred: S S R R N N
  std::vector<L> g{L::supported, L::supported, L::supported, L::refuted, L::refuted, L::nei};
  std::vector<L> p{L::supported, L::supported, L::refuted, L::refuted, L::nei, L::nei};
  // S: 2/(2+0+1)*2 -> 2*2/(4+0+1)=0.8 ; R: tp1 fp1 fn1 -> 0.5 ; N: tp1 fp1 fn0 -> 2/3
  EXPECT_NEAR(f1(p, g), 100.0 * (0.8 + 0.5 + 2.0 / 3.0) / 3.0, 1e-9);
  EXPECT_NEAR(f1(p, g, Averaging::micro), 100.0 * 4.0 / 6.0, 1e-9);
  EXPECT_NEAR(f1(p, g, Averaging::weighted), 100.0 * (3 * 0.8 + 2 * 0.5 + 1 * 2.0 / 3.0) / 6.0, 1e-9);
}

TEST(F1, MatchesOracleOnRandomInputs) {
  Rng rng(99);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<L> p(n), g(n);
    const int k = 2 + static_cast<int>(rng.below(2));
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = label_from_code(static_cast<int>(rng.below(k)));
      g[i] = label_from_code(static_cast<int>(rng.below(k)));
    }
    const double got = f1(p, g);
    EXPECT_NEAR(got, oracle_macro(p, g), 1e-9);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 100.0);
    EXPECT_NEAR(f1(p, g, Averaging::micro), oracle_accuracy(p, g), 1e-9);
  }
}

TEST(F1, PerfectAndErrors) {
  std::vector<L> g{L::supported, L::refuted, L::nei};
  EXPECT_DOUBLE_EQ(f1(g, g), 100.0);
  std::vector<L> short_p{L::supported};
  EXPECT_THROW(f1(short_p, g), LengthMismatch);
  std::vector<L> empty;
  EXPECT_THROW(f1(empty, empty), EmptyInput);
  EXPECT_EQ(parse_averaging("weighted"), Averaging::weighted);
  EXPECT_THROW(parse_averaging("harmonic"), InvalidConfig);
}
