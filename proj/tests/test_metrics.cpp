#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "ontoweak/metrics.hpp"
#include "ontoweak/random.hpp"

namespace ow = ontoweak;
using ow::Matrix;

namespace {

// Walk the ranking positive by positive, counting how many items sit at or
// above each one.
double ap_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  std::vector<std::size_t> order(s.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a] > s[b]; });
  double sum = 0.0, pos = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!y[order[k]]) continue;
    pos += 1.0;
    sum += pos / static_cast<double>(k + 1);
  }
  return sum / pos;
}

double auc_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!y[i] || y[j]) continue;
      pairs += 1.0;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

ow::Ontology small() {
  return ow::Ontology::from_parents({{"S1", "one"}, {"S2", "two"}},
                                    {{"s1", "a"}, {"s2", "b"}, {"s3", "c"}}, {0, 0, 1});
}

}  // namespace

TEST(AveragePrecision, Fixture) {
  const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  const std::vector<int> y{1, 0, 1, 1};
  EXPECT_NEAR(*ow::average_precision(s, y), (1.0 + 2.0 / 3.0 + 3.0 / 4.0) / 3.0, 1e-15);
  EXPECT_NEAR(*ow::average_precision(s, y), 0.80556, 1e-5);
}

TEST(AveragePrecision, PerfectAndSingle) {
  EXPECT_EQ(*ow::average_precision(std::vector<double>{0.9, 0.8, 0.1}, std::vector<int>{1, 1, 0}), 1.0);
  EXPECT_EQ(*ow::average_precision(std::vector<double>{0.3}, std::vector<int>{1}), 1.0);
  EXPECT_FALSE(ow::average_precision(std::vector<double>{0.3, 0.2}, std::vector<int>{0, 0}));
}

TEST(AveragePrecision, TiesKeepInputOrder) {
  EXPECT_EQ(*ow::average_precision(std::vector<double>{0.5, 0.5}, std::vector<int>{1, 0}), 1.0);
  EXPECT_EQ(*ow::average_precision(std::vector<double>{0.5, 0.5}, std::vector<int>{0, 1}), 0.5);
}

TEST(RocAuc, Fixtures) {
  EXPECT_EQ(*ow::roc_auc(std::vector<double>{0.9, 0.1}, std::vector<int>{1, 0}), 1.0);
  EXPECT_EQ(*ow::roc_auc(std::vector<double>{0.4, 0.4, 0.4}, std::vector<int>{1, 0, 1}), 0.5);
  EXPECT_NEAR(*ow::roc_auc(std::vector<double>{0.9, 0.8, 0.7, 0.6}, std::vector<int>{1, 0, 1, 1}),
              1.0 / 3.0, 1e-15);
  EXPECT_FALSE(ow::roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}));
  EXPECT_FALSE(ow::roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{0, 0}));
}

TEST(Metrics, MatchBruteForceOracles) {
  ow::Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + ow::uniform_index(rng, 50);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      // coarse grid forces ties
      s[i] = static_cast<double>(ow::uniform_index(rng, 10)) / 10.0;
      y[i] = ow::bernoulli(rng, 0.4);
    }
    const int pos = std::accumulate(y.begin(), y.end(), 0);
    const auto ap = ow::average_precision(s, y);
    const auto auc = ow::roc_auc(s, y);
    ASSERT_EQ(ap.has_value(), pos > 0);
    ASSERT_EQ(auc.has_value(), pos > 0 && pos < static_cast<int>(n));
    if (ap) EXPECT_NEAR(*ap, ap_oracle(s, y), 1e-9);
    if (auc) EXPECT_NEAR(*auc, auc_oracle(s, y), 1e-9);
  }
}

TEST(Metrics, MonotoneTransformInvariance) {
  ow::Rng rng(8);
  std::vector<double> s(40), t(40);
  std::vector<int> y(40);
  for (std::size_t i = 0; i < 40; ++i) {
    s[i] = ow::normal(rng);
    t[i] = std::exp(3.0 * s[i]) + 1.0;
    y[i] = ow::bernoulli(rng, 0.5);
  }
  EXPECT_EQ(*ow::average_precision(s, y), *ow::average_precision(t, y));
  EXPECT_EQ(*ow::roc_auc(s, y), *ow::roc_auc(t, y));
  std::vector<double> neg(40);
  for (std::size_t i = 0; i < 40; ++i) neg[i] = -s[i];
  EXPECT_NEAR(*ow::roc_auc(neg, y), 1.0 - *ow::roc_auc(s, y), 1e-15);
}

TEST(Metrics, RandomRankingApNearPrevalence) {
  ow::Rng rng(9);
  std::vector<int> y(100, 0);
  for (std::size_t i = 0; i < 30; ++i) y[i] = 1;
  std::vector<double> s(100);
  double mean = 0.0;
  for (int k = 0; k < 1000; ++k) {
    for (double& v : s) v = ow::uniform01(rng);
    mean += *ow::average_precision(s, y);
  }
  EXPECT_NEAR(mean / 1000.0, 0.3, 0.05);
}

TEST(Weighted, HandValues) {
  using O = std::optional<double>;
  const std::vector<std::size_t> uniform{2, 2, 2};
  EXPECT_NEAR(*ow::weighted_level_metric(std::vector<O>{0.2, 0.4, 0.9}, uniform), 0.5, 1e-15);
  EXPECT_EQ(*ow::weighted_level_metric(std::vector<O>{0.2, 0.7}, std::vector<std::size_t>{0, 5}), 0.7);
  EXPECT_EQ(*ow::weighted_level_metric(std::vector<O>{0.5, 1.0}, std::vector<std::size_t>{1, 3}), 0.875);
}

TEST(Weighted, UndefinedClassesRenormalize) {
  using O = std::optional<double>;
  const std::vector<O> m{0.5, std::nullopt, 1.0};
  const std::vector<std::size_t> c{1, 10, 3};
  EXPECT_EQ(*ow::weighted_level_metric(m, c), 0.875);
  const auto w = ow::level_weights(m, c);
  EXPECT_EQ(w[1], 0.0);
  EXPECT_NEAR(w[0] + w[2], 1.0, 1e-15);
  EXPECT_FALSE(ow::weighted_level_metric(std::vector<O>{std::nullopt}, std::vector<std::size_t>{3}));
}

TEST(Weighted, WithinRangeOfIncluded) {
  ow::Rng rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::optional<double>> m(6);
    std::vector<std::size_t> c(6);
    for (std::size_t i = 0; i < 6; ++i) {
      m[i] = ow::uniform01(rng);
      c[i] = 1 + ow::uniform_index(rng, 100);
    }
    const double w = *ow::weighted_level_metric(m, c);
    const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
    EXPECT_GE(w, **lo - 1e-15);
    EXPECT_LE(w, **hi + 1e-15);
  }
}

TEST(Evaluate, PerfectScoresGiveOne) {
  const auto ont = small();
  const Matrix sub_t = Matrix::from_rows({{1, 0, 0}, {0, 1, 1}, {0, 0, 1}, {1, 1, 0}});
  const Matrix sup_t = Matrix::from_rows({{1, 0}, {1, 1}, {0, 1}, {1, 0}});
  const std::vector<std::size_t> sc{5, 3, 2}, pc{6, 2};
  const auto r = ow::evaluate_predictions("mlp", ont, sub_t, sub_t, sup_t, sup_t, sc, pc);
  EXPECT_EQ(*r.sub.weighted_ap, 1.0);
  EXPECT_EQ(*r.sub.weighted_auc, 1.0);
  EXPECT_EQ(*r.super.weighted_ap, 1.0);
  EXPECT_EQ(*r.super.weighted_auc, 1.0);
  EXPECT_EQ(r.instances, 4u);
  EXPECT_NEAR(r.sub.weights[0], 0.5, 1e-15);
}

TEST(Evaluate, PerClassMatchesOracles) {
  const auto ont = small();
  ow::Rng rng(12);
  Matrix ss(40, 3), st(40, 3), ps(40, 2), pt(40, 2);
  for (double& v : ss.data()) v = ow::uniform01(rng);
  for (double& v : st.data()) v = ow::bernoulli(rng, 0.3);
  for (double& v : ps.data()) v = ow::uniform01(rng);
  for (double& v : pt.data()) v = ow::bernoulli(rng, 0.5);
  const std::vector<std::size_t> sc{1, 2, 3}, pc{1, 1};
  const auto r = ow::evaluate_predictions("mlp", ont, ss, st, ps, pt, sc, pc);
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<double> s(40);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) s[i] = ss(i, c), y[i] = st(i, c) > 0.5;
    EXPECT_NEAR(*r.sub.ap[c], ap_oracle(s, y), 1e-9);
    EXPECT_NEAR(*r.sub.auc[c], auc_oracle(s, y), 1e-9);
  }
}

TEST(Report, JsonRoundTripAndSummary) {
  const auto ont = small();
  const Matrix sub_t = Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {1, 1, 0}});
  const Matrix sub_s = Matrix::from_rows({{0.9, 0.2, 0.1}, {0.3, 0.8, 0.5}, {0.6, 0.4, 0.2}});
  const Matrix sup_t = Matrix::from_rows({{1, 0}, {1, 0}, {1, 1}});
  const Matrix sup_s = Matrix::from_rows({{0.9, 0.1}, {0.7, 0.2}, {0.8, 0.6}});
  const std::vector<std::size_t> sc{4, 4, 1}, pc{5, 1};
  const auto r = ow::evaluate_predictions("siamese_onto", ont, sub_s, sub_t, sup_s, sup_t, sc, pc);
  EXPECT_FALSE(r.sub.ap[2].has_value());

  const std::string text = ow::report_to_json(r);
  const auto doc = nlohmann::json::parse(text);
  EXPECT_EQ(doc.at("summary").size(), 4u);
  for (const char* key : {"sub_ap", "super_ap", "sub_auc", "super_auc"})
    EXPECT_TRUE(doc.at("summary").contains(key)) << key;
  const auto& row = doc.at("classes").at(0);
  for (const char* key : {"model", "level", "class_id", "class_name", "ap", "auc", "weight"})
    EXPECT_TRUE(row.contains(key)) << key;
  EXPECT_TRUE(doc.at("classes").at(2).at("ap").is_null());

  const auto back = ow::report_from_json(text);
  EXPECT_EQ(back.model, "siamese_onto");
  EXPECT_EQ(back.sub.ap, r.sub.ap);
  EXPECT_EQ(back.super.auc, r.super.auc);
  EXPECT_EQ(back.sub.weighted_ap, r.sub.weighted_ap);
  EXPECT_EQ(ow::report_to_json(back), text);
  EXPECT_NE(ow::report_to_table(r).find("summary"), std::string::npos);
}
