#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mmfc/anno.hpp"
#include "mmfc/random.hpp"
#include "support.hpp"

using namespace mmfc;
using namespace mmfc::anno;

namespace {

// Agreement computed by enumerating rater pairs explicitly.
double pair_counting_kappa(const CountMatrix& m) {
  const std::size_t k = m.front().size();
  std::vector<double> totals(k, 0.0);
  double ratings = 0.0, agree_sum = 0.0;
  for (const auto& row : m) {
    std::vector<std::size_t> flat;
    for (std::size_t j = 0; j < k; ++j)
      for (int c = 0; c < row[j]; ++c) flat.push_back(j);
    double agree = 0.0, pairs = 0.0;
    for (std::size_t a = 0; a < flat.size(); ++a)
      for (std::size_t b = 0; b < flat.size(); ++b) {
        if (a == b) continue;
        pairs += 1.0;
        agree += flat[a] == flat[b];
      }
    agree_sum += agree / pairs;
    for (std::size_t j = 0; j < k; ++j) totals[j] += row[j];
    ratings += static_cast<double>(flat.size());
  }
  const double po = agree_sum / static_cast<double>(m.size());
  double pe = 0.0;
  for (double t : totals) pe += (t / ratings) * (t / ratings);
  return (po - pe) / (1.0 - pe);
}

std::vector<AnnotationSet> synthetic_sets(Rng& rng, std::size_t items, int adversary) {
  std::vector<Annotation> rows;
  for (std::size_t i = 0; i < items; ++i) {
    const int truth = 1 + static_cast<int>(rng.below(5));
    for (int r = 1; r <= 5; ++r) {
      int v = truth;
      if (r == adversary) {
        v = 6 - truth;
      } else if (rng.below(5) == 0) {
        v = std::clamp(truth + (rng.below(2) ? 1 : -1), 1, 5);
      }
      rows.push_back({"i" + std::to_string(i), "g", "r" + std::to_string(r), Question::q6, std::to_string(v), {}});
    }
  }
  return group(rows);
}

}  // namespace

TEST(Anno, Categories) {
  EXPECT_EQ(categories(Question::q1).size(), 2u);
  EXPECT_EQ(categories(Question::q5).size(), 4u);
  EXPECT_EQ(categories(Question::q6).size(), 5u);
  EXPECT_EQ(parse_question("q3"), Question::q3);
  EXPECT_THROW(parse_question("Q7"), SchemaViolation);
  EXPECT_EQ(normalize_response(Question::q1, " Yes "), "yes");
  EXPECT_EQ(normalize_response(Question::q5, "The label is TRUE"), "true");
  EXPECT_EQ(normalize_response(Question::q5, "unprovable"), "unprovable");
  EXPECT_EQ(normalize_response(Question::q6, "4"), "4");
  EXPECT_THROW(normalize_response(Question::q6, "6"), SchemaViolation);
  EXPECT_THROW(normalize_response(Question::q1, "maybe"), SchemaViolation);
}

TEST(Anno, MajorityMatchesCountingOracle) {
  Rng rng(5);
  for (int t = 0; t < 10000; ++t) {
    const auto q = kAllQuestions[rng.below(6)];
    const auto cats = categories(q);
    const std::size_t n = 1 + rng.below(7);
    std::vector<std::string> resp;
    for (std::size_t i = 0; i < n; ++i) resp.emplace_back(cats[rng.below(cats.size())]);
    std::string want;
    std::size_t best = 0;
    for (auto c : cats) {
      const auto cnt = static_cast<std::size_t>(std::count(resp.begin(), resp.end(), std::string(c)));
      if (cnt > best) best = cnt, want = std::string(c);
    }
    ASSERT_EQ(majority(q, resp), want);
  }
  EXPECT_THROW(majority(Question::q1, std::vector<std::string>{}), EmptyInput);
  EXPECT_EQ(majority(Question::q1, std::vector<std::string>{"yes", "no"}), "no");
  EXPECT_EQ(majority(Question::q5, std::vector<std::string>{"no", "unprovable"}), "unprovable");
}

TEST(Anno, Predictability) {
  EXPECT_EQ(q5_category(VeracityLabel::supported), "true");
  EXPECT_EQ(q5_category(VeracityLabel::refuted), "false");
  EXPECT_EQ(q5_category(VeracityLabel::nei), "unprovable");
  std::vector<std::string> q5{"no", "false", "no"};
  EXPECT_TRUE(predictability(q5, VeracityLabel::refuted));
  EXPECT_FALSE(predictability(q5, VeracityLabel::supported));
}

TEST(Kappa, HandValues) {
  // Two items split 2/2 across two categories.
  EXPECT_NEAR(fleiss_kappa({{2, 2}, {2, 2}}), -1.0 / 3.0, 1e-12);
  // Perfect agreement on different categories.
  EXPECT_NEAR(fleiss_kappa({{3, 0}, {0, 3}}), 1.0, 1e-12);
  // Textbook example: 10 items, 14 raters, 5 categories.
  const CountMatrix book{{0, 0, 0, 0, 14}, {0, 2, 6, 4, 2}, {0, 0, 3, 5, 6}, {0, 3, 9, 2, 0},
                         {2, 2, 8, 1, 1},  {7, 7, 0, 0, 0}, {3, 2, 6, 3, 0}, {2, 5, 3, 2, 2},
                         {6, 5, 2, 1, 0},  {0, 2, 2, 3, 7}};
  EXPECT_NEAR(fleiss_kappa(book), 0.210, 0.0005);
  EXPECT_NEAR(fleiss_kappa(book), pair_counting_kappa(book), 1e-12);
}

TEST(Kappa, MatchesPairCountingOnRandomMatrices) {
  Rng rng(17);
  for (int t = 0; t < 500; ++t) {
    const std::size_t items = 2 + rng.below(20), k = 2 + rng.below(4);
    const int n = 2 + static_cast<int>(rng.below(6));
    CountMatrix m(items, std::vector<int>(k, 0));
    for (auto& row : m)
      for (int r = 0; r < n; ++r) ++row[rng.below(k)];
    double want;
    try {
      want = pair_counting_kappa(m);
    } catch (...) {
      continue;
    }
    if (!std::isfinite(want)) {
      EXPECT_THROW(fleiss_kappa(m), DegenerateAgreement);
      continue;
    }
    const double got = fleiss_kappa(m);
    EXPECT_NEAR(got, want, 1e-9);
    EXPECT_LE(got, 1.0 + 1e-12);
    EXPECT_NEAR(fleiss_kappa_general(m), got, 1e-12);

    // Permuting items or categories leaves kappa unchanged.
    auto shuffled = m;
    rng.shuffle(std::span(shuffled));
    EXPECT_NEAR(fleiss_kappa(shuffled), got, 1e-12);
    for (auto& row : shuffled) std::reverse(row.begin(), row.end());
    EXPECT_NEAR(fleiss_kappa(shuffled), got, 1e-12);
  }
}

TEST(Kappa, Errors) {
  EXPECT_THROW(fleiss_kappa({}), EmptyInput);
  EXPECT_THROW(fleiss_kappa({{2, 1}, {1, 1}}), RaggedMatrix);
  EXPECT_THROW(fleiss_kappa({{1, 0}, {0, 1}}), RaggedMatrix);
  EXPECT_THROW(fleiss_kappa({{3, 0}, {3, 0}}), DegenerateAgreement);
  // The general form skips items with fewer than two ratings.
  EXPECT_NEAR(fleiss_kappa_general({{2, 2}, {1, 0}, {2, 2}}), -1.0 / 3.0, 1e-12);
}

TEST(Filter, RemovesTheAdversary) {
  Rng rng(23);
  auto sets = synthetic_sets(rng, 60, 3);
  auto rep = filter_annotators(sets, 0.6);
  ASSERT_FALSE(rep.removed.empty());
  EXPECT_EQ(rep.removed.front(), "r3");
  EXPECT_GT(rep.final_kappa, rep.initial_kappa);
  for (std::size_t i = 1; i < rep.kappa_after.size(); ++i) EXPECT_GT(rep.kappa_after[i], rep.kappa_after[i - 1]);
  EXPECT_TRUE(std::is_sorted(rep.kept.begin(), rep.kept.end()));
  EXPECT_EQ(rep.kept.size() + rep.removed.size(), 5u);
  EXPECT_GE(rep.kept.size(), 2u);

  // Leave-one-out oracle for the first step.
  std::vector<std::string> all{"r1", "r2", "r3", "r4", "r5"};
  double best = -2;
  std::string who;
  for (const auto& drop : all) {
    std::vector<std::string> keep;
    for (const auto& a : all)
      if (a != drop) keep.push_back(a);
    const double k = fleiss_kappa(count_matrix(sets, Question::q6, &keep));
    if (k > best) best = k, who = drop;
  }
  EXPECT_EQ(who, rep.removed.front());
  EXPECT_NEAR(best, rep.kappa_after.front(), 1e-12);
}

TEST(Filter, ThresholdZeroDisables) {
  Rng rng(23);
  auto sets = synthetic_sets(rng, 40, 2);
  auto rep = filter_annotators(sets, 0.0);
  EXPECT_TRUE(rep.removed.empty());
  EXPECT_EQ(rep.kept.size(), 5u);
  EXPECT_DOUBLE_EQ(rep.final_kappa, rep.initial_kappa);
  auto strict = filter_annotators(sets, 0.99);
  EXPECT_GE(strict.kept.size(), 2u);
}

TEST(Filter, RestrictToDropsAnswers) {
  Rng rng(2);
  auto sets = synthetic_sets(rng, 5, 0);
  auto kept = restrict_to(sets, {"r1", "r2"});
  for (const auto& s : kept) EXPECT_EQ(s.answers.at(Question::q6).size(), 2u);
}

TEST(AnnoFixture, ReadGroupSummarize) {
  auto rows = read_annotations(test::source_path("data/fixtures/anno/annotations.tsv"));
  ASSERT_EQ(rows.size(), 36u * 2 * 5 * 6);
  auto sets = group(rows);
  ASSERT_EQ(sets.size(), 72u);
  EXPECT_NO_THROW(check_complete(sets, 5));
  EXPECT_THROW(check_complete(sets, 4), SchemaViolation);
  EXPECT_EQ(sets[0].label, VeracityLabel::supported);

  auto filt = filter_annotators(sets, 0.2);
  auto rep = summarize(restrict_to(sets, filt.kept), filt);
  ASSERT_EQ(rep.generators.size(), 2u);
  EXPECT_EQ(rep.generators[0].generator, "gpt-3.5-turbo");
  for (const auto& g : rep.generators) {
    EXPECT_EQ(g.items, 36u);
    std::size_t total = 0;
    for (const auto& [v, c] : g.majority_counts.at(Question::q6)) total += c;
    EXPECT_EQ(total, 36u);
    EXPECT_GE(g.quality_mean, 1.0);
    EXPECT_LE(g.quality_mean, 5.0);
    EXPECT_GE(g.predictability, g.q5_majority_correct);
  }
  EXPECT_GT(rep.generators[1].quality_mean, rep.generators[0].quality_mean);
  auto j = rep.to_json();
  EXPECT_TRUE(j.contains("kappa"));
  EXPECT_EQ(j["generators"].size(), 2u);
}

TEST(AnnoFixture, BadRowsAreRejected) {
  test::TempDir dir;
  test::spit(dir / "a.tsv", "item_id\tgenerator\tannotator_id\tquestion\tresponse\nx\tg\tp\tQ1\tperhaps\n");
  EXPECT_THROW(read_annotations(dir / "a.tsv"), SchemaViolation);
  test::spit(dir / "b.tsv", "item_id\tgenerator\tquestion\tresponse\nx\tg\tQ1\tyes\n");
  EXPECT_THROW(read_annotations(dir / "b.tsv"), MissingField);
}
