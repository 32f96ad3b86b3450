#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <doctest.h>

#include "eegdecode/error.hpp"
#include "eegdecode/evaluation.hpp"
#include "eegdecode/rng.hpp"
#include "eegdecode/svm.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace eegdecode;
using fixture::full_decisions;
using fixture::random_points;
using fixture::separable_labels;

namespace {

struct Dataset {
  int subjects = 6;
  int per_class = 10;
  int features = 10;
  int informative = 0;  // leading columns shifted for the positive class
  double shift = 0.0;
};

FeatureMatrix make_dataset(const Dataset& d, std::uint64_t seed) {
  auto rng = make_rng(seed, "ml-dataset");
  FeatureMatrix fm;
  const int rows = d.subjects * 2 * d.per_class;
  fm.values.resize(rows, d.features);
  for (int j = 0; j < d.features; ++j) {
    fm.features.push_back({FeatureKind::BandPower, "F" + std::to_string(1000 + j), "", "alpha"});
  }
  int r = 0;
  for (int s = 0; s < d.subjects; ++s) {
    for (int cls = 0; cls < 2; ++cls) {
      for (int i = 0; i < d.per_class; ++i, ++r) {
        fm.labels.push_back({"S" + std::to_string(10 + s), cls ? "altered" : "neutral", "memory", 2.0 * i});
        for (int j = 0; j < d.features; ++j) {
          fm.values(r, j) = standard_normal(rng) + (cls && j < d.informative ? d.shift : 0.0);
        }
      }
    }
  }
  return fm;
}


double median(std::vector<double> v) { return quartiles(std::move(v)).median; }

}  // namespace

// ---------------------------------------------------------------------------
// Kernel SVM

TEST_CASE("polynomial kernel") {
  const Eigen::RowVector2d u(1.0, 2.0);
  const Eigen::RowVector2d v(3.0, -1.0);
  CHECK(polynomial_kernel(u, v, 2, 1.0) == 4.0);
  CHECK(polynomial_kernel(u, v, 3, 0.0) == 1.0);
  const Eigen::MatrixXd a = (Eigen::MatrixXd(2, 2) << 1, 2, 3, -1).finished();
  const auto k = kernel_matrix(a, a, 2, 1.0);
  CHECK(k(0, 1) == 4.0);
  CHECK(k(0, 0) == 36.0);
}

TEST_CASE("two separated points: both become support vectors") {
  const Eigen::MatrixXd x = (Eigen::MatrixXd(2, 1) << -1.0, 1.0).finished();
  const Eigen::VectorXi y = (Eigen::VectorXi(2) << -1, 1).finished();
  const auto model = train_ksvm(x, y);
  CHECK(model.support_vectors.rows() == 2);
  CHECK(predict(model, x).labels == y);
}

TEST_CASE("XOR: degree-2 kernel separates it and matches the brute-force dual") {
  const Eigen::MatrixXd x = (Eigen::MatrixXd(4, 2) << 1, 1, -1, -1, 1, -1, -1, 1).finished();
  const Eigen::VectorXi y = (Eigen::VectorXi(4) << 1, 1, -1, -1).finished();
  const auto model = train_ksvm(x, y);
  CHECK(predict(model, x).labels == y);
  const Eigen::MatrixXd k = kernel_matrix(x, x, 2, 1.0);
  SvmConfig tight;
  tight.tolerance = 1e-10;
  const auto dual = solve_svm_dual(k, y, tight);
  const auto brute = oracle::brute_force_svm_dual(k, y, 1.0);
  CHECK(oracle::svm_dual_objective(k, y, dual.alphas) == doctest::Approx(brute.objective).epsilon(1e-8));
}

TEST_CASE("property: dual feasibility and KKT at 1e-3 on 50 random separable fixtures") {
  auto rng = make_rng(1, "kkt");
  const SvmConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::MatrixXd x = random_points(20 + trial, 3, rng);
    const Eigen::VectorXi y = separable_labels(x, rng);
    const Eigen::MatrixXd k = kernel_matrix(x, x, cfg.degree, cfg.coef0);
    const auto sol = solve_svm_dual(k, y, cfg);
    REQUIRE(sol.converged);
    CHECK(std::fabs(sol.alphas.dot(y.cast<double>())) < 1e-6);
    CHECK((sol.alphas.array() >= -1e-9).all());
    CHECK((sol.alphas.array() <= cfg.c + 1e-9).all());
    const Eigen::VectorXd f = full_decisions(k, y, sol);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double margin = y(i) * f(i);
      if (sol.alphas(i) <= 1e-12) CHECK(margin >= 1.0 - 1e-3);
      else if (sol.alphas(i) >= cfg.c - 1e-12) CHECK(margin <= 1.0 + 1e-3);
      else CHECK(std::fabs(margin - 1.0) <= 1e-3);
    }
    const auto model = train_ksvm(x, y, cfg);
    CHECK(predict(model, x).labels == y);
  }
}

TEST_CASE("property: SMO matches a brute-force QP on problems of at most 8 points") {
  auto rng = make_rng(2, "brute");
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 3 + trial % 6;
    Eigen::MatrixXd x = random_points(n, 2, rng);
    Eigen::VectorXi y(n);
    for (int i = 0; i < n; ++i) y(i) = (i % 2) ? 1 : -1;
    SvmConfig cfg;
    cfg.c = trial % 3 == 0 ? 0.5 : 1.0;
    const Eigen::MatrixXd k = kernel_matrix(x, x, cfg.degree, cfg.coef0);
    const auto sol = solve_svm_dual(k, y, cfg);
    const auto brute = oracle::brute_force_svm_dual(k, y, cfg.c);
    CHECK(std::fabs(oracle::svm_dual_objective(k, y, sol.alphas) - brute.objective) < 1e-4);
  }
}

TEST_CASE("property: flipping the labels negates the decision values") {
  auto rng = make_rng(3, "flip");
  SvmConfig cfg;
  cfg.tolerance = 1e-9;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd x = random_points(30, 4, rng);
    Eigen::VectorXi y(30);
    for (int i = 0; i < 30; ++i) y(i) = x(i, 0) + 0.5 * standard_normal(rng) > 0 ? 1 : -1;
    const Eigen::MatrixXd probe = random_points(15, 4, rng);
    const auto a = predict(train_ksvm(x, y, cfg), probe).decisions;
    const Eigen::VectorXi flipped = -y;
    const auto b = predict(train_ksvm(x, flipped, cfg), probe).decisions;
    CHECK((a + b).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("property: row order does not change the decision function") {
  auto rng = make_rng(4, "order");
  SvmConfig cfg;
  cfg.tolerance = 1e-9;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd x = random_points(40, 3, rng);
    Eigen::VectorXi y(40);
    for (int i = 0; i < 40; ++i) y(i) = x(i, 0) * x(i, 1) + 0.3 * standard_normal(rng) > 0 ? 1 : -1;
    std::vector<Eigen::Index> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle_in_place(perm, rng);
    Eigen::MatrixXd xp(40, 3);
    Eigen::VectorXi yp(40);
    for (int i = 0; i < 40; ++i) {
      xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
      yp(i) = y(perm[static_cast<std::size_t>(i)]);
    }
    const Eigen::MatrixXd probe = random_points(20, 3, rng);
    const auto a = predict(train_ksvm(x, y, cfg), probe).decisions;
    const auto b = predict(train_ksvm(xp, yp, cfg), probe).decisions;
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("property: predicted labels on separable fixtures survive feature scaling in [0.5, 2]") {
  auto rng = make_rng(5, "scale");
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd x = random_points(30, 2, rng);
    const Eigen::VectorXi y = separable_labels(x, rng);
    for (double scale : {0.5, 1.0, 2.0}) {
      const Eigen::MatrixXd xs = scale * x;
      CHECK(predict(train_ksvm(xs, y), xs).labels == y);
    }
  }
  const Eigen::MatrixXd xor_x = (Eigen::MatrixXd(4, 2) << 1, 1, -1, -1, 1, -1, -1, 1).finished();
  const Eigen::VectorXi xor_y = (Eigen::VectorXi(4) << 1, 1, -1, -1).finished();
  for (double scale : {0.5, 2.0}) CHECK(predict(train_ksvm(scale * xor_x, xor_y), scale * xor_x).labels == xor_y);
}

TEST_CASE("SVM input errors") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(3, 2);
  CHECK_THROWS_AS(train_ksvm(x, Eigen::VectorXi::Ones(3)), DataError);
  Eigen::MatrixXd bad = (Eigen::MatrixXd(2, 2) << 1, 2, 3, 4).finished();
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(train_ksvm(bad, (Eigen::VectorXi(2) << 1, -1).finished()), DataError);
  const auto model = train_ksvm((Eigen::MatrixXd(2, 2) << 1, 2, 3, 4).finished(), (Eigen::VectorXi(2) << 1, -1).finished());
  CHECK_THROWS_AS(predict(model, Eigen::MatrixXd::Ones(1, 3)), DataError);
  SvmConfig cfg;
  cfg.c = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.degree = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("decision value of exactly zero predicts the positive class") {
  TrainedClassifier model;
  model.support_vectors = Eigen::MatrixXd::Zero(1, 1);
  model.alphas = Eigen::VectorXd::Zero(1);
  model.labels = Eigen::VectorXi::Ones(1);
  model.bias = 0.0;
  const auto p = predict(model, Eigen::MatrixXd::Ones(2, 1));
  CHECK(p.decisions(0) == 0.0);
  CHECK(p.labels(0) == 1);
}

// ---------------------------------------------------------------------------
// Balancing and folds

TEST_CASE("23 subjects x 2 classes x 40 gives 1840 rows; same seed, same rows") {
  const auto fm = make_dataset({23, 50, 2, 0, 0.0}, 6);
  const auto a = balance_classes(fm, LabelKey::Condition, 40, 7);
  CHECK(a.rows() == 1840);
  std::map<std::pair<std::string, std::string>, int> cells;
  for (const auto& l : a.labels) ++cells[{l.subject, l.condition}];
  CHECK(cells.size() == 46);
  for (const auto& [cell, count] : cells) CHECK(count == 40);
  const auto b = balance_classes(fm, LabelKey::Condition, 40, 7);
  CHECK(a.values == b.values);
  CHECK(a.labels == b.labels);
  const auto c = balance_classes(fm, LabelKey::Condition, 40, 8);
  CHECK(c.values != a.values);
  // without replacement: no row drawn twice
  std::set<std::tuple<std::string, std::string, double>> seen;
  for (const auto& l : a.labels) seen.insert({l.subject, l.condition, l.start_s});
  CHECK(seen.size() == 1840);
}

TEST_CASE("a cell with 11 windows cannot supply 40 without replacement") {
  const auto fm = make_dataset({2, 11, 2, 0, 0.0}, 9);
  CHECK(window_count(25.0, 4.0, 2.0) == 11);
  CHECK_THROWS_WITH_AS(balance_classes(fm, LabelKey::Condition, 40, 1), doctest::Contains("S10"), DataError);
  const auto replaced = balance_classes(fm, LabelKey::Condition, 40, 1, true);
  CHECK(replaced.rows() == 2 * 2 * 40);
}

TEST_CASE("stratified 5-fold split of 880 per class: folds of 352 rows") {
  Eigen::VectorXi y(1760);
  for (int i = 0; i < 1760; ++i) y(i) = i < 880 ? -1 : 1;
  const auto folds = stratified_folds(y, 5, 11);
  REQUIRE(folds.size() == 5);
  std::vector<int> seen(1760, 0);
  for (const auto& f : folds) {
    CHECK(f.size() == 352);
    int pos = 0;
    for (auto i : f) {
      ++seen[static_cast<std::size_t>(i)];
      pos += y(i) > 0;
    }
    CHECK(pos == 176);
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  CHECK(stratified_folds(y, 5, 11) == folds);
  CHECK(stratified_folds(y, 5, 12) != folds);
  CHECK_THROWS_AS(stratified_folds((Eigen::VectorXi(6) << 1, 1, 1, 1, -1, -1).finished(), 5, 1), DataError);
}

TEST_CASE("k-fold CV on well-separated clusters is perfect") {
  auto rng = make_rng(12, "kfold-sep");
  Eigen::MatrixXd x = random_points(60, 3, rng);
  Eigen::VectorXi y(60);
  for (int i = 0; i < 60; ++i) {
    y(i) = i % 2 ? 1 : -1;
    x(i, 0) += 6.0 * y(i);
  }
  const auto r = kfold_cv(x, y, 5, SvmConfig{}, 3);
  CHECK(r.mean_accuracy == 1.0);
  CHECK(r.fold_accuracies.size() == 5);
  CHECK(kfold_cv(x, y, 5, SvmConfig{}, 3).test_folds == r.test_folds);
}

// ---------------------------------------------------------------------------
// ROC

TEST_CASE("ROC: perfect separation gives AUC 1 and a diagonal confusion matrix") {
  const Eigen::VectorXd d = (Eigen::VectorXd(6) << -3, -2, -1, 1, 2, 3).finished();
  const Eigen::VectorXi t = (Eigen::VectorXi(6) << -1, -1, -1, 1, 1, 1).finished();
  const auto r = roc_and_confusion(d, t);
  CHECK(r.auc == 1.0);
  CHECK(r.confusion(0, 0) == 3);
  CHECK(r.confusion(1, 1) == 3);
  CHECK(r.confusion_pct(0, 0) == 100.0);
  CHECK(r.fpr.front() == 0.0);
  CHECK(r.tpr.back() == 1.0);
  CHECK_THROWS_AS(roc_and_confusion(d, Eigen::VectorXi::Ones(6)), DataError);
}

TEST_CASE("ROC: uninformative decisions give AUC near 0.5; rows sum to class counts") {
  auto rng = make_rng(13, "roc-null");
  double total = 0.0;
  for (int seed = 0; seed < 50; ++seed) {
    Eigen::VectorXd d(200);
    Eigen::VectorXi t(200);
    for (int i = 0; i < 200; ++i) {
      d(i) = standard_normal(rng);
      t(i) = i < 90 ? -1 : 1;
    }
    const auto r = roc_and_confusion(d, t);
    total += r.auc;
    CHECK(r.confusion.row(0).sum() == 90);
    CHECK(r.confusion.row(1).sum() == 110);
    CHECK(r.confusion_pct.row(1).sum() == doctest::Approx(100.0));
    CHECK(r.auc == doctest::Approx(oracle::auc_mann_whitney(d, t)).epsilon(1e-12));
  }
  CHECK(std::fabs(total / 50.0 - 0.5) < 0.05);
}

// ---------------------------------------------------------------------------
// LOSO

TEST_CASE("23 subjects at 40 per class: 880 train and 40 test per class in all 23 iterations") {
  const auto fm = make_dataset({23, 40, 3, 3, 1.0}, 14);
  EvaluationConfig cfg;
  cfg.inner_folds = 0;
  const auto report = loso_evaluate(fm, cfg, 3, 15);
  REQUIRE(report.iterations.size() == 23);
  std::set<std::string> held;
  for (const auto& it : report.iterations) {
    held.insert(it.held_out);
    CHECK(it.n_train_negative == 880);
    CHECK(it.n_train_positive == 880);
    CHECK(it.n_test_negative == 40);
    CHECK(it.n_test_positive == 40);
    CHECK(it.roc.confusion.row(0).sum() == 40);
    CHECK(it.roc.confusion.row(1).sum() == 40);
    CHECK(it.accuracy >= 0.0);
    CHECK(it.accuracy <= 1.0);
  }
  CHECK(held.size() == 23);
  CHECK(report.negative_class == "altered");
  CHECK(report.positive_class == "neutral");
}

TEST_CASE("strongly separable planted effect: median LOSO accuracy at least 0.9") {
  const auto fm = make_dataset({8, 15, 20, 4, 3.0}, 16);
  EvaluationConfig cfg;
  const auto report = loso_evaluate(fm, cfg, 4, 17);
  CHECK(median(report.accuracies()) >= 0.9);
  for (const auto& it : report.iterations) {
    CHECK(it.inner_cv_accuracy >= 0.0);
    CHECK(it.selected_features.size() == 4);
  }
}

TEST_CASE("label-independent features: accuracies inside the central 99 percent binomial band") {
  const auto fm = make_dataset({23, 40, 20, 0, 0.0}, 18);
  EvaluationConfig cfg;
  cfg.inner_folds = 0;
  const auto report = loso_evaluate(fm, cfg, 10, 19);
  const int lo = oracle::binomial_quantile(80, 0.5, 0.005);
  const int hi = oracle::binomial_quantile(80, 0.5, 0.995);
  int inside = 0;
  for (const auto& it : report.iterations) {
    const int correct = static_cast<int>(std::lround(it.accuracy * 80.0));
    if (correct >= lo && correct <= hi) ++inside;
  }
  CHECK(inside >= 21);
}

TEST_CASE("no leakage: held-out rows never influence the training side of their iteration") {
  const auto fm = make_dataset({6, 12, 15, 2, 1.0}, 20);
  EvaluationConfig cfg;
  const auto base = loso_evaluate(fm, cfg, 3, 21);
  // make column 14 perfectly informative inside S10 only
  auto injected = fm;
  for (Eigen::Index r = 0; r < injected.rows(); ++r) {
    if (injected.labels[static_cast<std::size_t>(r)].subject == "S10") {
      injected.values(r, 14) = injected.labels[static_cast<std::size_t>(r)].condition == "altered" ? 4.0 : -4.0;
    }
  }
  const auto leaked = loso_evaluate(injected, cfg, 3, 21);
  REQUIRE(leaked.iterations.size() == base.iterations.size());
  for (std::size_t i = 0; i < base.iterations.size(); ++i) {
    if (base.iterations[i].held_out != "S10") continue;
    CHECK(leaked.iterations[i].selected_features == base.iterations[i].selected_features);
    CHECK(leaked.iterations[i].inner_cv_accuracy == base.iterations[i].inner_cv_accuracy);
    CHECK(leaked.iterations[i].accuracy == base.iterations[i].accuracy);
  }
}

TEST_CASE("LOSO preconditions") {
  EvaluationConfig cfg;
  CHECK_THROWS_AS(loso_evaluate(make_dataset({2, 5, 3, 0, 0.0}, 22), cfg, 2, 1), DataError);
  auto fm = make_dataset({4, 5, 3, 0, 0.0}, 23);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index r = 0; r < fm.rows(); ++r) {
    const auto& l = fm.labels[static_cast<std::size_t>(r)];
    if (!(l.subject == "S11" && l.condition == "altered")) keep.push_back(r);
  }
  CHECK_THROWS_WITH_AS(loso_evaluate(fm.select_rows(keep), cfg, 2, 1), doctest::Contains("S11"), DataError);
}

// ---------------------------------------------------------------------------
// Scrambling and baselines

TEST_CASE("scrambling preserves per-subject class counts and actually permutes") {
  const auto fm = make_dataset({5, 10, 2, 0, 0.0}, 24);
  const auto s = scramble_labels(fm, LabelKey::Condition, 25);
  CHECK(s.values == fm.values);
  std::map<std::pair<std::string, std::string>, int> before;
  std::map<std::pair<std::string, std::string>, int> after;
  int moved = 0;
  for (Eigen::Index r = 0; r < fm.rows(); ++r) {
    const auto& a = fm.labels[static_cast<std::size_t>(r)];
    const auto& b = s.labels[static_cast<std::size_t>(r)];
    CHECK(a.subject == b.subject);
    ++before[{a.subject, a.condition}];
    ++after[{b.subject, b.condition}];
    moved += a.condition != b.condition;
  }
  CHECK(before == after);
  CHECK(moved > 0);
  CHECK(scramble_labels(fm, LabelKey::Condition, 25).labels == s.labels);
}

TEST_CASE("planted effect: scrambled median near 0.5, real vs scrambled significant") {
  const auto fm = make_dataset({23, 20, 10, 3, 1.5}, 26);
  EvaluationConfig cfg;
  cfg.inner_folds = 0;
  const auto report = evaluate_with_baseline(fm, cfg, 3, 27);
  CHECK(report.baseline_accuracies.size() == 23);
  CHECK(std::fabs(median(report.baseline_accuracies) - 0.5) <= 0.05);
  CHECK(report.real_vs_scrambled.p < 0.003);
  CHECK(report.real_vs_scrambled.p_lt_0_003);
  const auto j = to_json(report);
  CHECK(j["iterations"].size() == 23);
  CHECK(j["baseline_accuracies"].size() == 23);
  CHECK(j.contains("config"));
  CHECK(j["seed"] == 27);
}

TEST_CASE("evaluation is a pure function of data, config and seed") {
  const auto fm = make_dataset({5, 10, 8, 2, 1.0}, 28);
  EvaluationConfig cfg;
  const auto a = to_json(evaluate_with_baseline(fm, cfg, 4, 29)).dump();
  const auto b = to_json(evaluate_with_baseline(fm, cfg, 4, 29)).dump();
  CHECK(a == b);
}

// ---------------------------------------------------------------------------
// Sweep

TEST_CASE("sweep schedule") {
  CHECK(sweep_schedule(1, 100) == std::vector<int>{1});
  const auto s = sweep_schedule(400, 4205);
  CHECK(std::find(s.begin(), s.end(), 180) != s.end());
  CHECK(s.back() == 400);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  CHECK(sweep_schedule(400, 12) == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12});
  CHECK(sweep_schedule(17, 100).back() == 17);
  CHECK_THROWS_AS(sweep_schedule(10, 0), DataError);
}

TEST_CASE("quartiles use linear interpolation") {
  const auto q = quartiles({4.0, 1.0, 3.0, 2.0});
  CHECK(q.q1 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(2.5));
  CHECK(q.q3 == doctest::Approx(3.25));
}

TEST_CASE("max_features = 1 gives a single-point curve") {
  const auto fm = make_dataset({4, 8, 5, 1, 2.0}, 30);
  EvaluationConfig cfg;
  cfg.inner_folds = 0;
  const auto sweep = feature_sweep(fm, cfg, 1, 31);
  REQUIRE(sweep.points.size() == 1);
  CHECK(sweep.points[0].n_features == 1);
  CHECK(sweep.points[0].accuracies.size() == 4);
  CHECK(sweep.points[0].scrambled_accuracies.size() == 4);
}

TEST_CASE("10 informative of 1000 features: accuracy at 10 is at least accuracy at 1 over 20 seeds") {
  EvaluationConfig cfg;
  cfg.inner_folds = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto fm = make_dataset({6, 20, 1000, 10, 1.0}, 100 + seed);
    const auto sweep = feature_sweep(fm, cfg, 10, 200 + seed);
    REQUIRE(sweep.points.size() == 10);
    CHECK(sweep.points[9].real.median >= sweep.points[0].real.median);
  }
}

TEST_CASE("best feature count and sweep CSV round trip") {
  SweepResult a{"a", "neutral", "altered", {}};
  SweepResult b{"b", "neutral", "hypnosis", {}};
  for (int n : {1, 2, 3}) {
    SweepPoint p;
    p.n_features = n;
    p.real = {0.5, 0.6, 0.7};
    p.scrambled = {0.4, 0.5, 0.6};
    p.test.h = n;
    p.test.p = n == 2 ? 0.001 : 0.5;
    p.test.p_lt_0_003 = p.test.p < 0.003;
    a.points.push_back(p);
    p.test.p = n >= 2 ? 0.001 : 0.5;
    p.test.p_lt_0_003 = p.test.p < 0.003;
    b.points.push_back(p);
  }
  CHECK(best_feature_count({a, b}) == 2);
  fixture::TempDir dir("sweep");
  write_sweep_csv({a, b}, dir.path() / "sweep.csv");
  const auto back = read_sweep_csv(dir.path() / "sweep.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].positive_class == "hypnosis");
  CHECK(back[1].points[2].test.p == 0.001);
  CHECK(back[0].points[1].real.median == 0.6);
}
