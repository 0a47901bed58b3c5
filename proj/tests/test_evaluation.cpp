#include <gtest/gtest.h>

#include "support.hpp"

using namespace textline;
using namespace testsupport;

namespace {

ModelPool lines(std::vector<std::pair<ModelId, Language>> spec) {
  ModelPool pool;
  for (auto [id, lang] : spec) pool.push_back(horizontal_model(id, lang, 0, 10));
  return pool;
}

Labeling labels(std::vector<int> ids) {
  Labeling l(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) l[i] = ids[i] < 0 ? kOutlier : Label(ids[i]);
  return l;
}

// Largest one-to-one matching weight over all admissible pairings.
std::size_t best_assignment_size(const std::vector<std::vector<double>>& overlap, double overlap_min,
                                 double* best_weight) {
  std::size_t nd = overlap.size(), ng = nd ? overlap[0].size() : 0;
  std::vector<std::size_t> perm(std::max(nd, ng));
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::size_t best_count = 0;
  *best_weight = 0;
  do {
    std::size_t count = 0;
    double w = 0;
    for (std::size_t d = 0; d < nd; ++d)
      if (perm[d] < ng && overlap[d][perm[d]] >= overlap_min) ++count, w += overlap[d][perm[d]];
    if (count > best_count || (count == best_count && w > *best_weight)) best_count = count, *best_weight = w;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best_count;
}

}  // namespace

TEST(Match, IdentityIsPerfect) {
  auto gt = lines({{0, Language::English}, {1, Language::Korean}});
  auto l = labels({0, 0, 1, 1, -1});
  auto m = evaluate_lines(gt, l, gt, l);
  EXPECT_EQ(m.matches.size(), 2u);
  EXPECT_DOUBLE_EQ(m.f, 1.0);
}

TEST(Match, NoDetections) {
  auto gt = lines({{0, Language::English}});
  auto m = evaluate_lines(ModelPool{}, labels({-1, -1}), gt, labels({0, 0}));
  EXPECT_TRUE(m.matches.empty());
  EXPECT_DOUBLE_EQ(m.precision, 1.0);
  EXPECT_DOUBLE_EQ(m.recall, 0.0);
  EXPECT_DOUBLE_EQ(m.f, 0.0);
}

TEST(Match, LanguageMustAgree) {
  auto gt = lines({{0, Language::English}});
  auto det = lines({{5, Language::Digit}});
  auto m = evaluate_lines(det, labels({5, 5, 5}), gt, labels({0, 0, 0}));
  EXPECT_TRUE(m.matches.empty());
}

TEST(Match, TwoByTwoGreedyEqualsExhaustive) {
  // gt A = {0,1,2,3}, gt B = {4,5,6}; det X = {0,1,2,4}, det Y = {3,5,6}
  auto gt = lines({{0, Language::Korean}, {1, Language::Korean}});
  auto det = lines({{10, Language::Korean}, {11, Language::Korean}});
  auto gl = labels({0, 0, 0, 0, 1, 1, 1});
  auto dl = labels({10, 10, 10, 11, 10, 11, 11});
  auto matches = match_lines(det, dl, gt, gl, 0.3);
  std::vector<std::vector<double>> ov{{3.0 / 5.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 4.0}};
  double best_w = 0;
  std::size_t best = best_assignment_size(ov, 0.3, &best_w);
  ASSERT_EQ(matches.size(), best);
  double w = 0;
  for (const auto& m : matches) w += m.overlap;
  EXPECT_NEAR(w, best_w, 1e-12);
  EXPECT_EQ(matches[0].detected, 10);
  EXPECT_EQ(matches[0].truth, 0);
}

TEST(Match, TiesGoToLowerGroundTruthId) {
  auto gt = lines({{3, Language::English}, {1, Language::English}});
  auto det = lines({{0, Language::English}});
  // det {0,1} against gt 3 = {0,2} and gt 1 = {1,3}: overlap 1/3 with each
  auto gl = labels({3, 1, 3, 1});
  auto dl = labels({0, 0, -1, -1});
  auto matches = match_lines(det, dl, gt, gl, 0.3);
  ASSERT_EQ(matches.size(), 1u);
  EXPECT_EQ(matches[0].truth, 1);
}

TEST(Match, RaisingThresholdNeverAddsMatches) {
  std::mt19937_64 rng(1);
  auto gt = lines({{0, Language::English}, {1, Language::Korean}, {2, Language::English}});
  auto det = lines({{0, Language::English}, {1, Language::Korean}, {2, Language::English}, {3, Language::Korean}});
  std::uniform_int_distribution<int> g(-1, 2), d(-1, 3);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> gi(12), di(12);
    for (auto& v : gi) v = g(rng);
    for (auto& v : di) v = d(rng);
    auto gl = labels(gi), dl = labels(di);
    std::size_t prev = std::numeric_limits<std::size_t>::max();
    for (double th : {0.05, 0.2, 0.4, 0.5, 0.7, 0.9, 1.0}) {
      auto n = match_lines(det, dl, gt, gl, th).size();
      EXPECT_LE(n, prev);
      prev = n;
    }
    // Permuting line order leaves metrics unchanged.
    ModelPool det_rev(det.rbegin(), det.rend()), gt_rev(gt.rbegin(), gt.rend());
    auto a = evaluate_lines(det, dl, gt, gl), b = evaluate_lines(det_rev, dl, gt_rev, gl);
    EXPECT_EQ(a.matches.size(), b.matches.size());
    EXPECT_DOUBLE_EQ(a.f, b.f);
  }
}

TEST(Metrics, Arithmetic) {
  std::vector<LineMatch> five(5), three(3);
  auto perfect = precision_recall_f(five, 5, 5);
  EXPECT_DOUBLE_EQ(perfect.precision, 1);
  EXPECT_DOUBLE_EQ(perfect.recall, 1);
  EXPECT_DOUBLE_EQ(perfect.f, 1);
  auto none = precision_recall_f({}, 0, 3);
  EXPECT_DOUBLE_EQ(none.precision, 1);
  EXPECT_DOUBLE_EQ(none.recall, 0);
  EXPECT_DOUBLE_EQ(none.f, 0);
  auto partial = precision_recall_f(three, 4, 5);
  EXPECT_DOUBLE_EQ(partial.precision, 0.75);
  EXPECT_DOUBLE_EQ(partial.recall, 0.6);
  EXPECT_NEAR(partial.f, 2 * 0.45 / 1.35, 1e-12);
  EXPECT_NEAR(partial.f, 0.6667, 1e-4);
  auto empty = precision_recall_f({}, 0, 0);
  EXPECT_DOUBLE_EQ(empty.f, 1);
  EXPECT_THROW(precision_recall_f(five, 4, 5), Error);
}

TEST(Transfer, CarriesLabelsByBoxOverlap) {
  std::vector<TextCandidate> src{make_blob(0, {0, 0, 10, 10}), make_blob(1, {20, 0, 30, 10})};
  Labeling sl = labels({4, -1});
  std::vector<TextCandidate> dst{make_blob(7, {1, 0, 10, 10}), make_blob(8, {21, 1, 30, 10}),
                                 make_blob(9, {50, 50, 60, 60})};
  auto out = transfer_labeling(src, sl, dst);
  EXPECT_EQ(out.labels, (std::vector<Label>{Label(4), kOutlier, kOutlier}));
}
