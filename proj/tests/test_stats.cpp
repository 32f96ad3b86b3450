#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <doctest.h>

#include "eegdecode/error.hpp"
#include "eegdecode/rng.hpp"
#include "eegdecode/stats.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace eegdecode;

namespace {

FeatureMatrix two_class_matrix(const Eigen::MatrixXd& values, const std::vector<std::string>& conditions) {
  FeatureMatrix fm;
  fm.values = values;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    fm.features.push_back({FeatureKind::BandPower, "E" + std::to_string(100 + j), "", "alpha"});
  }
  for (std::size_t i = 0; i < conditions.size(); ++i) fm.labels.push_back({"S1", conditions[i], "memory", 2.0 * i});
  return fm;
}

std::vector<BehavioralRecord> behavioral_fixture(std::uint64_t seed, const std::string& shifted_condition,
                                                 double shift_sd) {
  auto rng = make_rng(seed, "behavior");
  const std::vector<std::string> conditions{"altered", "hypnosis", "neutral", "placebo"};
  const std::vector<std::string> tasks{"arith", "memory", "reading", "spatial", "verbal"};
  std::vector<BehavioralRecord> out;
  for (int s = 0; s < 12; ++s) {
    for (const auto& c : conditions) {
      for (const auto& t : tasks) {
        BehavioralRecord r;
        r.subject = "S" + std::to_string(s);
        r.condition = c;
        r.task = t;
        r.n_submitted = 20;
        r.n_correct = 10 + static_cast<int>(std::lround(std::clamp(3.0 * standard_normal(rng), -10.0, 10.0)));
        r.duration_s = 60.0 + 5.0 * standard_normal(rng) + (c == shifted_condition ? shift_sd * 5.0 : 0.0);
        out.push_back(r);
      }
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Kruskal-Wallis

TEST_CASE("{1,2,3,4} vs {5,6,7,8}: H = 16/3, p from the chi-square(1) tail") {
  const std::vector<std::vector<double>> g{{1, 2, 3, 4}, {5, 6, 7, 8}};
  const auto r = kruskal_wallis(g);
  CHECK(r.h == doctest::Approx(16.0 / 3.0).epsilon(1e-14));
  CHECK(r.h == doctest::Approx(oracle::kw_h(g)).epsilon(1e-14));
  CHECK(r.p == doctest::Approx(oracle::chi2_sf(16.0 / 3.0, 1.0)).epsilon(1e-10));
  CHECK(r.p == doctest::Approx(0.0209).epsilon(0.01));
  CHECK(r.group_sizes == std::vector<int>{4, 4});
  CHECK(std::fabs(r.p - oracle::kw_exact_p(g)) < 0.02);
}

TEST_CASE("identical groups and all-equal data give H = 0, p = 1") {
  const auto a = kruskal_wallis({{1, 2, 3}, {1, 2, 3}});
  CHECK(a.h == 0.0);
  CHECK(a.p == 1.0);
  const auto b = kruskal_wallis({{4, 4}, {4, 4, 4}});
  CHECK(b.h == 0.0);
  CHECK(b.p == 1.0);
}

TEST_CASE("tied example {1,1,2} vs {1,2,2}: tie-corrected H and its chi-square p") {
  const std::vector<std::vector<double>> g{{1, 1, 2}, {1, 2, 2}};
  const auto r = kruskal_wallis(g);
  // ranks: 1s share 2, 2s share 5; H = 3/7 before, 5/9 after the tie correction
  CHECK(r.h == doctest::Approx(5.0 / 9.0).epsilon(1e-14));
  CHECK(r.h == doctest::Approx(oracle::kw_h(g)).epsilon(1e-14));
  CHECK(r.p == doctest::Approx(oracle::chi2_sf(5.0 / 9.0, 1.0)).epsilon(1e-10));
  // every one of the 20 splits is at least as extreme as the observed one
  CHECK(oracle::kw_exact_p(g) == 1.0);
}

TEST_CASE("tie correction matches the oracle on random tied data with three groups") {
  auto rng = make_rng(1, "kw-ties");
  boost::random::uniform_int_distribution<int> level(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> g(3);
    for (auto& grp : g) {
      grp.resize(static_cast<std::size_t>(2 + trial % 5));
      for (auto& v : grp) v = level(rng);
    }
    const auto r = kruskal_wallis(g);
    CHECK(r.h == doctest::Approx(oracle::kw_h(g)).epsilon(1e-12));
    if (r.h > 0.0) CHECK(r.p == doctest::Approx(oracle::chi2_sf(r.h, 2.0)).epsilon(1e-9));
  }
}

TEST_CASE("KW input errors") {
  CHECK_THROWS_AS(kruskal_wallis({{1, 2, 3}}), DataError);
  CHECK_THROWS_AS(kruskal_wallis({{1, 2}, {}}), DataError);
  CHECK_THROWS_AS(kruskal_wallis({{1}, {2}}), DataError);
  CHECK_THROWS_AS(kruskal_wallis({{1, std::nan("")}, {2}}), DataError);
}

TEST_CASE("property: KW is exactly invariant under strictly monotone transforms") {
  auto rng = make_rng(2, "kw-monotone");
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> g(2 + trial % 3);
    for (auto& grp : g) {
      grp.resize(static_cast<std::size_t>(3 + trial % 7));
      for (auto& v : grp) v = std::round(4.0 * standard_normal(rng)) / 2.0;
    }
    auto t = g;
    for (auto& grp : t) {
      for (auto& v : grp) v = std::exp(v) * 3.0 + 7.0;
    }
    const auto a = kruskal_wallis(g);
    const auto b = kruskal_wallis(t);
    CHECK(a.h == b.h);
    CHECK(a.p == b.p);
  }
}

TEST_CASE("property: null p-values reject at 5 percent in 0.05 +/- 0.015 of 2000 runs") {
  auto rng = make_rng(3, "kw-null");
  int rejections = 0;
  for (int run = 0; run < 2000; ++run) {
    std::vector<std::vector<double>> g(2, std::vector<double>(40));
    for (auto& grp : g) {
      for (auto& v : grp) v = standard_normal(rng);
    }
    const auto r = kruskal_wallis(g);
    CHECK(r.h >= 0.0);
    CHECK(r.p > 0.0);
    CHECK(r.p <= 1.0);
    if (r.p < 0.05) ++rejections;
  }
  CHECK(std::fabs(rejections / 2000.0 - 0.05) <= 0.015);
}

// ---------------------------------------------------------------------------
// Ranking

TEST_CASE("a single informative column ranks first") {
  auto rng = make_rng(4, "rank-planted");
  Eigen::MatrixXd v(40, 30);
  std::vector<std::string> cond;
  for (Eigen::Index i = 0; i < 40; ++i) {
    cond.push_back(i % 2 ? "altered" : "neutral");
    for (Eigen::Index j = 0; j < 30; ++j) v(i, j) = standard_normal(rng) + (j == 17 && i % 2 ? 3.0 : 0.0);
  }
  const auto ranked = rank_features(two_class_matrix(v, cond), LabelKey::Condition);
  REQUIRE(ranked.size() == 30);
  CHECK(ranked.front().column == 17);
  CHECK(ranked.front().feature.channel == "E117");
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].p <= ranked[i].p);
}

TEST_CASE("one feature gives one entry; wrong class count errors") {
  const Eigen::MatrixXd v = (Eigen::MatrixXd(4, 1) << 1, 2, 3, 4).finished();
  CHECK(rank_features(two_class_matrix(v, {"a", "b", "a", "b"}), LabelKey::Condition).size() == 1);
  CHECK_THROWS_AS(rank_features(two_class_matrix(v, {"a", "a", "a", "a"}), LabelKey::Condition), DataError);
  CHECK_THROWS_AS(rank_features(two_class_matrix(v, {"a", "b", "c", "a"}), LabelKey::Condition), DataError);
}

TEST_CASE("row restriction selects one pairwise comparison") {
  const Eigen::MatrixXd v = (Eigen::MatrixXd(6, 1) << 1, 2, 3, 4, 5, 6).finished();
  const auto fm = two_class_matrix(v, {"a", "b", "c", "a", "b", "c"});
  const auto ranked = rank_features(fm, LabelKey::Condition, {0, 1, 3, 4});
  REQUIRE(ranked.size() == 1);
  CHECK(ranked[0].h == doctest::Approx(oracle::kw_h({{1, 4}, {2, 5}})));
}

TEST_CASE("property: column permutation leaves the ranked descriptor sequence unchanged") {
  auto rng = make_rng(5, "rank-perm");
  Eigen::MatrixXd v(12, 8);
  std::vector<std::string> cond;
  for (Eigen::Index i = 0; i < 12; ++i) {
    cond.push_back(i < 6 ? "a" : "b");
    // coarse values so several columns tie on p
    for (Eigen::Index j = 0; j < 8; ++j) v(i, j) = std::round(standard_normal(rng));
  }
  const auto fm = two_class_matrix(v, cond);
  const auto base = rank_features(fm, LabelKey::Condition);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Eigen::Index> order(8);
    std::iota(order.begin(), order.end(), 0);
    shuffle_in_place(order, rng);
    const auto permuted = rank_features(fm.select_columns(order), LabelKey::Condition);
    REQUIRE(permuted.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(permuted[i].feature == base[i].feature);
      CHECK(permuted[i].p == base[i].p);
    }
  }
}

TEST_CASE("ranking JSON round trip") {
  const Eigen::MatrixXd v = (Eigen::MatrixXd(4, 2) << 1, 9, 2, 8, 3, 8, 4, 7).finished();
  const auto ranked = rank_features(two_class_matrix(v, {"a", "a", "b", "b"}), LabelKey::Condition);
  const auto j = ranking_to_json(ranked, 0.05);
  const auto back = ranking_from_json(j);
  REQUIRE(back.size() == ranked.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].feature == ranked[i].feature);
    CHECK(back[i].p == ranked[i].p);
    CHECK(back[i].column == ranked[i].column);
  }
  CHECK_THROWS_AS(ranking_from_json(nlohmann::json{{"format_version", 1}}), DataError);
}

// ---------------------------------------------------------------------------
// Bonferroni

TEST_CASE("Bonferroni thresholds") {
  CHECK(bonferroni_threshold(0.01, 4205) == doctest::Approx(2.378e-6).epsilon(1e-3));
  CHECK(std::round(bonferroni_threshold(0.01, 4205) * 1e7) / 10.0 == doctest::Approx(2.4));
  CHECK(bonferroni_threshold(0.05, 15) == doctest::Approx(0.00333).epsilon(1e-3));
  CHECK(bonferroni_threshold(0.05, 1) == 0.05);
  CHECK(bonferroni_threshold(0.05, 20) == doctest::Approx(0.0025));
  CHECK_THROWS_AS(bonferroni_threshold(0.0, 3), ConfigError);
  CHECK_THROWS_AS(bonferroni_threshold(1.0, 3), ConfigError);
  CHECK_THROWS_AS(bonferroni_threshold(0.05, 0), ConfigError);
}

// ---------------------------------------------------------------------------
// Behavioral metrics

TEST_CASE("response accuracy") {
  CHECK(response_accuracy({"S", "c", "t", 22, 22, 1.0}) == 1.0);
  CHECK(response_accuracy({"S", "c", "t", 0, 5, 1.0}) == 0.0);
  CHECK(response_accuracy({"S", "c", "t", 3, 4, 1.0}) == 0.75);
  CHECK_THROWS_AS(response_accuracy({"S", "c", "t", 0, 0, 1.0}), DataError);
  CHECK_THROWS_AS(validate(BehavioralRecord{"S", "c", "t", 5, 4, 1.0}), DataError);
  CHECK_THROWS_AS(validate(BehavioralRecord{"S", "c", "t", 1, 4, 0.0}), DataError);
}

TEST_CASE("inverse efficiency score") {
  CHECK(inverse_efficiency_score(100.0, 0.2) == 125.0);
  CHECK(inverse_efficiency_score(42.0, 0.0) == 42.0);
  CHECK_THROWS_AS(inverse_efficiency_score(100.0, 1.0), DataError);
  CHECK_THROWS_AS(inverse_efficiency_score(0.0, 0.1), DataError);
}

TEST_CASE("metric names round trip") {
  for (auto m : behavioral_metrics()) CHECK(parse_behavioral_metric(to_string(m)) == m);
  CHECK_THROWS_AS(parse_behavioral_metric("speed"), ConfigError);
}

TEST_CASE("identical metric values across conditions: p = 1") {
  std::vector<BehavioralRecord> recs;
  for (const std::string c : {"a", "b", "c", "d"}) {
    for (int s = 0; s < 3; ++s) recs.push_back({"S" + std::to_string(s), c, "memory", 5, 10, 30.0});
  }
  const auto out = compare_conditions(recs, BehavioralMetric::Duration);
  REQUIRE(out.size() == 1);
  CHECK(out[0].result.p == 1.0);
  CHECK(out[0].conditions.size() == 4);
}

TEST_CASE("5 tasks x 4 metrics give 20 tests with the 0.05/20 threshold") {
  const auto report = behavioral_report(behavioral_fixture(6, "", 0.0));
  CHECK(report["n_tests"] == 20);
  CHECK(report["tests"].size() == 20);
  CHECK(report["bonferroni_threshold"].get<double>() == doctest::Approx(0.0025));
  CHECK(report["bonferroni_threshold_0.01"].get<double>() == doctest::Approx(0.0005));
  for (const auto& t : report["tests"]) {
    CHECK(t["conditions"].size() == 4);
    CHECK(t.contains("p_lt_0.05"));
    CHECK(t.contains("p_lt_0.01"));
    CHECK(t["bonferroni_significant"].get<bool>() == (t["p"].get<double>() < 0.0025));
    CHECK(t["bonferroni_significant_0.01"].get<bool>() == (t["p"].get<double>() < 0.0005));
  }
}

TEST_CASE("one condition shifted by 10 sd is Bonferroni significant on duration") {
  const auto out = compare_conditions(behavioral_fixture(7, "hypnosis", 10.0), BehavioralMetric::Duration);
  REQUIRE(out.size() == 5);
  for (const auto& tc : out) CHECK(tc.result.p < 0.0025);
}

TEST_CASE("missing condition data for a task is an error") {
  auto recs = behavioral_fixture(8, "", 0.0);
  std::erase_if(recs, [](const BehavioralRecord& r) { return r.task == "memory" && r.condition == "placebo"; });
  CHECK_THROWS_WITH_AS(compare_conditions(recs, BehavioralMetric::Accuracy), doctest::Contains("placebo"), DataError);
}

TEST_CASE("behavioral CSV round trip and header check") {
  fixture::TempDir dir("behavior");
  const auto recs = behavioral_fixture(9, "", 0.0);
  save_behavioral_csv(recs, dir.path() / "b.csv");
  const auto back = load_behavioral_csv(dir.path() / "b.csv");
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].subject == recs[i].subject);
    CHECK(back[i].n_correct == recs[i].n_correct);
    CHECK(back[i].duration_s == recs[i].duration_s);
  }
  std::ofstream(dir.path() / "bad.csv") << "subject,cond\n";
  CHECK_THROWS_AS(load_behavioral_csv(dir.path() / "bad.csv"), DataError);
}
