#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <boost/random/uniform_int_distribution.hpp>

#include "eegdecode/error.hpp"
#include "eegdecode/evaluation.hpp"
#include "eegdecode/rng.hpp"

namespace eegdecode {

namespace {

using Index = Eigen::Index;
using Rows = std::vector<Index>;

std::string key_name(LabelKey key) {
  switch (key) {
    case LabelKey::Subject: return "subject";
    case LabelKey::Condition: return "condition";
    case LabelKey::Task: return "task";
  }
  return "?";
}

Eigen::VectorXi class_vector(const FeatureMatrix& fm, LabelKey key, const std::string& negative,
                             const std::string& positive) {
  Eigen::VectorXi y(fm.rows());
  for (Index i = 0; i < fm.rows(); ++i) {
    const auto& v = label_value(fm.labels[static_cast<std::size_t>(i)], key);
    if (v == positive) y[i] = 1;
    else if (v == negative) y[i] = -1;
    else throw DataError("row " + std::to_string(i) + " has class '" + v + "', expected '" + negative + "' or '" +
                         positive + "'");
  }
  return y;
}

Eigen::VectorXi gather(const Eigen::VectorXi& y, const Rows& rows) {
  Eigen::VectorXi out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Index>(i)] = y[rows[i]];
  return out;
}

void elementwise_kernel(Eigen::MatrixXd& linear, const SvmConfig& svm) {
  linear.array() += svm.coef0;
  if (svm.degree == 2) linear = linear.array().square().matrix();
  else if (svm.degree != 1) linear = linear.array().pow(static_cast<double>(svm.degree)).matrix();
}

double kfold_on_kernel(const Eigen::MatrixXd& kernel, const Eigen::VectorXi& y, int k, const SvmConfig& svm,
                       std::uint64_t seed, KFoldResult* detail) {
  const auto folds = stratified_folds(y, k, seed);
  const Index n = y.size();
  double sum = 0.0;
  for (const auto& test : folds) {
    std::vector<char> is_test(static_cast<std::size_t>(n), 0);
    for (auto i : test) is_test[static_cast<std::size_t>(i)] = 1;
    Rows train;
    for (Index i = 0; i < n; ++i) {
      if (!is_test[static_cast<std::size_t>(i)]) train.push_back(i);
    }
    const Eigen::VectorXi ytr = gather(y, train);
    const Eigen::VectorXi yte = gather(y, test);
    const Eigen::MatrixXd ktr = kernel(train, train);
    const auto sol = solve_svm_dual(ktr, ytr, svm);
    if (!sol.converged) throw NumericError("SVM: SMO did not converge in inner cross-validation");
    const Eigen::VectorXd coef = sol.alphas.cwiseProduct(ytr.cast<double>());
    const Eigen::VectorXd dec = (kernel(test, train) * coef).array() + sol.bias;
    int correct = 0;
    for (Index i = 0; i < yte.size(); ++i) correct += ((dec[i] >= 0.0) ? 1 : -1) == yte[i];
    const double acc = static_cast<double>(correct) / static_cast<double>(yte.size());
    sum += acc;
    if (detail) detail->fold_accuracies.push_back(acc);
  }
  if (detail) detail->test_folds = folds;
  return sum / static_cast<double>(folds.size());
}

// Linear Gram matrix over rows (train rows first, then test rows) for a growing
// prefix of ranked columns.
struct FoldGram {
  Rows rows;
  Index n_train = 0;
  Eigen::MatrixXd linear;
  int n_cols = 0;

  void add(const Eigen::MatrixXd& values, const Rows& ranked_cols, int upto) {
    if (upto <= n_cols) return;
    Eigen::MatrixXd block(static_cast<Index>(rows.size()), upto - n_cols);
    for (int c = n_cols; c < upto; ++c) {
      const Index col = ranked_cols[static_cast<std::size_t>(c)];
      for (std::size_t r = 0; r < rows.size(); ++r) block(static_cast<Index>(r), c - n_cols) = values(rows[r], col);
    }
    linear.noalias() += block * block.transpose();
    n_cols = upto;
  }
};

struct Fold {
  std::string subject;
  Rows train;
  Rows test;
};

std::vector<Fold> make_folds(const FeatureMatrix& fm, const Eigen::VectorXi& y) {
  const auto subjects = fm.subjects();
  if (subjects.size() < 3) throw DataError("LOSO: need at least 3 subjects, found " + std::to_string(subjects.size()));
  std::vector<Fold> folds;
  for (const auto& s : subjects) {
    Fold f;
    f.subject = s;
    bool pos = false;
    bool neg = false;
    for (Index i = 0; i < fm.rows(); ++i) {
      if (fm.labels[static_cast<std::size_t>(i)].subject == s) {
        f.test.push_back(i);
        (y[i] > 0 ? pos : neg) = true;
      } else {
        f.train.push_back(i);
      }
    }
    if (!pos || !neg) throw DataError("LOSO: subject '" + s + "' is missing a class");
    folds.push_back(std::move(f));
  }
  return folds;
}

IterationResult score_fold(const Fold& fold, const FoldGram& gram, const Eigen::VectorXi& y,
                           const EvaluationConfig& cfg, std::uint64_t inner_seed) {
  const Eigen::VectorXi ytr = gather(y, fold.train);
  const Eigen::VectorXi yte = gather(y, fold.test);
  Eigen::MatrixXd kernel = gram.linear;
  elementwise_kernel(kernel, cfg.svm);
  const Index ntr = gram.n_train;
  const Index nte = static_cast<Index>(fold.test.size());
  const Eigen::MatrixXd ktr = kernel.topLeftCorner(ntr, ntr);

  const auto sol = solve_svm_dual(ktr, ytr, cfg.svm);
  if (!sol.converged) throw NumericError("SVM: SMO did not converge for held-out subject '" + fold.subject + "'");
  const Eigen::VectorXd coef = sol.alphas.cwiseProduct(ytr.cast<double>());
  const Eigen::VectorXd dec = (kernel.bottomLeftCorner(nte, ntr) * coef).array() + sol.bias;

  IterationResult it;
  it.held_out = fold.subject;
  it.roc = roc_and_confusion(dec, yte);
  it.accuracy = static_cast<double>(it.roc.confusion.trace()) / static_cast<double>(nte);
  it.n_train_negative = static_cast<int>((ytr.array() < 0).count());
  it.n_train_positive = static_cast<int>((ytr.array() > 0).count());
  it.n_test_negative = static_cast<int>((yte.array() < 0).count());
  it.n_test_positive = static_cast<int>((yte.array() > 0).count());
  if (cfg.inner_folds > 0) it.inner_cv_accuracy = kfold_on_kernel(ktr, ytr, cfg.inner_folds, cfg.svm, inner_seed, nullptr);
  return it;
}

Rows top_columns(const std::vector<RankedFeature>& ranked, int n) {
  Rows cols;
  for (int i = 0; i < n; ++i) cols.push_back(ranked[static_cast<std::size_t>(i)].column);
  return cols;
}

FoldGram init_gram(const Fold& fold) {
  FoldGram g;
  g.rows = fold.train;
  g.rows.insert(g.rows.end(), fold.test.begin(), fold.test.end());
  g.n_train = static_cast<Index>(fold.train.size());
  g.linear = Eigen::MatrixXd::Zero(static_cast<Index>(g.rows.size()), static_cast<Index>(g.rows.size()));
  return g;
}

nlohmann::json quartiles_json(const Quartiles& q) { return {{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}}; }

nlohmann::json test_json(const SignificanceTest& t) {
  return {{"h", t.h}, {"p", t.p}, {"p_lt_0.003", t.p_lt_0_003}, {"p_lt_0.0006", t.p_lt_0_0006}};
}

}  // namespace

FeatureMatrix balance_classes(const FeatureMatrix& fm, LabelKey class_key, int n_per_class, std::uint64_t seed,
                              bool with_replacement) {
  fm.check_shape();
  if (n_per_class < 1) throw ConfigError("balance_classes: n_per_class must be >= 1");
  std::set<std::string> classes;
  std::map<std::pair<std::string, std::string>, Rows> cells;
  for (Index i = 0; i < fm.rows(); ++i) {
    const auto& l = fm.labels[static_cast<std::size_t>(i)];
    classes.insert(label_value(l, class_key));
    cells[{l.subject, label_value(l, class_key)}].push_back(i);
  }
  Rows chosen;
  for (const auto& subject : fm.subjects()) {
    for (const auto& cls : classes) {
      const auto it = cells.find({subject, cls});
      if (it == cells.end()) {
        throw DataError("balance_classes: subject '" + subject + "' has no rows of class '" + cls + "'");
      }
      const auto& rows = it->second;
      Rng rng = make_rng(seed, "balance:" + subject + "/" + cls);
      if (with_replacement) {
        boost::random::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
        for (int k = 0; k < n_per_class; ++k) chosen.push_back(rows[pick(rng)]);
        continue;
      }
      if (static_cast<int>(rows.size()) < n_per_class) {
        throw DataError("balance_classes: cell (subject '" + subject + "', class '" + cls + "') has " +
                        std::to_string(rows.size()) + " rows, fewer than " + std::to_string(n_per_class) +
                        "; enable sampling with replacement or lower n_per_class");
      }
      Rows pool = rows;
      shuffle_in_place(pool, rng);
      pool.resize(static_cast<std::size_t>(n_per_class));
      std::sort(pool.begin(), pool.end());
      chosen.insert(chosen.end(), pool.begin(), pool.end());
    }
  }
  return fm.select_rows(chosen);
}

std::vector<std::vector<Index>> stratified_folds(const Eigen::VectorXi& y, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold: k must be >= 2");
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(k));
  for (int cls : {-1, 1}) {
    Rows members;
    for (Index i = 0; i < y.size(); ++i) {
      if (y[i] == cls) members.push_back(i);
    }
    if (static_cast<int>(members.size()) < k) {
      throw DataError("k-fold: class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                      " samples, too few for " + std::to_string(k) + " stratified folds");
    }
    Rng rng = make_rng(seed, cls > 0 ? "kfold:pos" : "kfold:neg");
    shuffle_in_place(members, rng);
    for (std::size_t i = 0; i < members.size(); ++i) folds[i % static_cast<std::size_t>(k)].push_back(members[i]);
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

KFoldResult kfold_cv(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y, int k,
                     const SvmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (x.rows() != y.size()) throw DataError("k-fold: feature rows and labels differ in count");
  if (x.rows() < k) throw DataError("k-fold: fewer samples than folds");
  if (!x.allFinite()) throw DataError("k-fold: non-finite features");
  for (Index i = 0; i < y.size(); ++i) {
    if (y[i] != 1 && y[i] != -1) throw DataError("k-fold: labels must be +1 or -1");
  }
  const Eigen::MatrixXd kernel = kernel_matrix(x, x, cfg.degree, cfg.coef0);
  KFoldResult res;
  res.mean_accuracy = kfold_on_kernel(kernel, y, k, cfg, seed, &res);
  return res;
}

RocResult roc_and_confusion(const Eigen::VectorXd& decisions, const Eigen::VectorXi& truth) {
  if (decisions.size() != truth.size()) throw DataError("ROC: decisions and truth differ in length");
  const Index n = truth.size();
  const auto n_pos = static_cast<double>((truth.array() == 1).count());
  const auto n_neg = static_cast<double>((truth.array() == -1).count());
  if (n_pos + n_neg != static_cast<double>(n)) throw DataError("ROC: truth labels must be +1 or -1");
  if (n_pos == 0 || n_neg == 0) throw DataError("ROC: truth contains a single class");

  RocResult r;
  for (Index i = 0; i < n; ++i) {
    const int t = truth[i] > 0 ? 1 : 0;
    const int p = decisions[i] >= 0.0 ? 1 : 0;
    ++r.confusion(t, p);
  }
  for (int t = 0; t < 2; ++t) {
    const double row = r.confusion.row(t).sum();
    for (int p = 0; p < 2; ++p) r.confusion_pct(t, p) = 100.0 * r.confusion(t, p) / row;
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return decisions[a] > decisions[b]; });
  r.fpr.push_back(0.0);
  r.tpr.push_back(0.0);
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double d = decisions[order[i]];
    for (; i < order.size() && decisions[order[i]] == d; ++i) (truth[order[i]] > 0 ? tp : fp) += 1.0;
    r.fpr.push_back(fp / n_neg);
    r.tpr.push_back(tp / n_pos);
  }
  for (std::size_t i = 1; i < r.fpr.size(); ++i) {
    r.auc += (r.fpr[i] - r.fpr[i - 1]) * 0.5 * (r.tpr[i] + r.tpr[i - 1]);
  }
  return r;
}

nlohmann::json to_json(const EvaluationConfig& cfg) {
  return {{"class_key", key_name(cfg.class_key)},
          {"negative_class", cfg.negative_class},
          {"positive_class", cfg.positive_class},
          {"inner_folds", cfg.inner_folds},
          {"svm",
           {{"kernel", "polynomial"},
            {"degree", cfg.svm.degree},
            {"coef0", cfg.svm.coef0},
            {"box_constraint", cfg.svm.c},
            {"tolerance", cfg.svm.tolerance},
            {"max_iterations", cfg.svm.max_iterations}}}};
}

std::vector<double> EvaluationReport::accuracies() const {
  std::vector<double> out;
  for (const auto& it : iterations) out.push_back(it.accuracy);
  return out;
}

nlohmann::json to_json(const EvaluationReport& report) {
  nlohmann::json iters = nlohmann::json::array();
  for (const auto& it : report.iterations) {
    nlohmann::json j = {{"held_out", it.held_out},
                        {"accuracy", it.accuracy},
                        {"train_counts", {{"negative", it.n_train_negative}, {"positive", it.n_train_positive}}},
                        {"test_counts", {{"negative", it.n_test_negative}, {"positive", it.n_test_positive}}},
                        {"selected_features", it.selected_features},
                        {"auc", it.roc.auc},
                        {"roc", {{"fpr", it.roc.fpr}, {"tpr", it.roc.tpr}}},
                        {"confusion",
                         {{it.roc.confusion(0, 0), it.roc.confusion(0, 1)}, {it.roc.confusion(1, 0), it.roc.confusion(1, 1)}}},
                        {"confusion_pct",
                         {{it.roc.confusion_pct(0, 0), it.roc.confusion_pct(0, 1)},
                          {it.roc.confusion_pct(1, 0), it.roc.confusion_pct(1, 1)}}}};
    if (it.inner_cv_accuracy >= 0.0) j["inner_cv_accuracy"] = it.inner_cv_accuracy;
    iters.push_back(std::move(j));
  }
  const auto acc = report.accuracies();
  nlohmann::json out = {{"format_version", 1},
                        {"negative_class", report.negative_class},
                        {"positive_class", report.positive_class},
                        {"n_features", report.n_features},
                        {"seed", report.seed},
                        {"config", report.config},
                        {"accuracies", acc},
                        {"iterations", iters}};
  if (!acc.empty()) out["accuracy_quartiles"] = quartiles_json(quartiles(acc));
  if (!report.baseline_accuracies.empty()) {
    out["baseline_accuracies"] = report.baseline_accuracies;
    out["baseline_quartiles"] = quartiles_json(quartiles(report.baseline_accuracies));
    out["real_vs_scrambled"] = test_json(report.real_vs_scrambled);
  }
  return out;
}

std::pair<std::string, std::string> resolve_classes(const FeatureMatrix& fm, const EvaluationConfig& cfg) {
  std::set<std::string> present;
  for (const auto& l : fm.labels) present.insert(label_value(l, cfg.class_key));
  if (present.size() != 2) {
    throw DataError("evaluation: expected exactly 2 " + key_name(cfg.class_key) + " classes, found " +
                    std::to_string(present.size()));
  }
  std::string neg = cfg.negative_class;
  std::string pos = cfg.positive_class;
  if (neg.empty() && pos.empty()) {
    neg = *present.begin();
    pos = *std::next(present.begin());
  } else if (neg.empty()) {
    neg = *present.begin() == pos ? *std::next(present.begin()) : *present.begin();
  } else if (pos.empty()) {
    pos = *present.begin() == neg ? *std::next(present.begin()) : *present.begin();
  }
  if (neg == pos || !present.count(neg) || !present.count(pos)) {
    throw ConfigError("evaluation: classes '" + neg + "' / '" + pos + "' do not match the data");
  }
  return {neg, pos};
}

EvaluationReport loso_evaluate(const FeatureMatrix& fm, const EvaluationConfig& cfg, int n_features,
                               std::uint64_t seed) {
  fm.check_shape();
  cfg.svm.validate();
  if (n_features < 1 || n_features > fm.cols()) {
    throw ConfigError("LOSO: n_features must lie in [1, " + std::to_string(fm.cols()) + "]");
  }
  if (!fm.values.allFinite()) throw DataError("LOSO: non-finite feature values");
  const auto [neg, pos] = resolve_classes(fm, cfg);
  const Eigen::VectorXi y = class_vector(fm, cfg.class_key, neg, pos);
  const auto folds = make_folds(fm, y);

  EvaluationReport report;
  report.negative_class = neg;
  report.positive_class = pos;
  report.n_features = n_features;
  report.seed = seed;
  report.config = to_json(cfg);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto ranked = rank_features(fm, cfg.class_key, folds[f].train);
    const Rows cols = top_columns(ranked, n_features);
    FoldGram gram = init_gram(folds[f]);
    gram.add(fm.values, cols, n_features);
    auto it = score_fold(folds[f], gram, y, cfg, derive_seed(seed, "inner-cv", f));
    for (int i = 0; i < n_features; ++i) it.selected_features.push_back(ranked[static_cast<std::size_t>(i)].feature.to_string());
    report.iterations.push_back(std::move(it));
  }
  return report;
}

FeatureMatrix scramble_labels(const FeatureMatrix& fm, LabelKey class_key, std::uint64_t seed) {
  fm.check_shape();
  if (class_key == LabelKey::Subject) throw ConfigError("scramble: cannot scramble the subject label");
  FeatureMatrix out = fm;
  for (const auto& s : fm.subjects()) {
    Rows rows;
    for (Index i = 0; i < fm.rows(); ++i) {
      if (fm.labels[static_cast<std::size_t>(i)].subject == s) rows.push_back(i);
    }
    Rows perm = rows;
    Rng rng = make_rng(seed, "scramble:" + s);
    shuffle_in_place(perm, rng);
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& src = fm.labels[static_cast<std::size_t>(perm[k])];
      auto& dst = out.labels[static_cast<std::size_t>(rows[k])];
      if (class_key == LabelKey::Condition) dst.condition = src.condition;
      else dst.task = src.task;
    }
  }
  return out;
}

std::vector<double> scrambled_baseline(const FeatureMatrix& fm, const EvaluationConfig& cfg, int n_features,
                                       std::uint64_t seed) {
  const auto scrambled = scramble_labels(fm, cfg.class_key, derive_seed(seed, "scrambled-labels"));
  return loso_evaluate(scrambled, cfg, n_features, seed).accuracies();
}

SignificanceTest compare_to_baseline(const std::vector<double>& real, const std::vector<double>& scrambled) {
  const auto res = kruskal_wallis({real, scrambled});
  SignificanceTest t;
  t.h = res.h;
  t.p = res.p;
  t.p_lt_0_003 = res.p < 0.003;
  t.p_lt_0_0006 = res.p < 0.0006;
  return t;
}

EvaluationReport evaluate_with_baseline(const FeatureMatrix& fm, const EvaluationConfig& cfg, int n_features,
                                        std::uint64_t seed) {
  auto report = loso_evaluate(fm, cfg, n_features, seed);
  report.baseline_accuracies = scrambled_baseline(fm, cfg, n_features, seed);
  report.real_vs_scrambled = compare_to_baseline(report.accuracies(), report.baseline_accuracies);
  return report;
}

std::vector<int> sweep_schedule(int max_features, int available) {
  if (max_features < 1) throw ConfigError("sweep: max_features must be >= 1");
  if (available < 1) throw DataError("sweep: empty ranking");
  static const int kCounts[] = {1,  2,  3,  4,   5,   6,   7,   8,   9,   10,  15,  20,  30,  40,
                                50, 60, 80, 100, 120, 140, 160, 180, 200, 250, 300, 350, 400};
  const int cap = std::min(max_features, available);
  std::vector<int> out;
  for (int c : kCounts) {
    if (c <= cap) out.push_back(c);
  }
  if (out.back() != cap) out.push_back(cap);
  return out;
}

Quartiles quartiles(std::vector<double> values) {
  if (values.empty()) throw DataError("quartiles: empty sample");
  std::sort(values.begin(), values.end());
  const auto q = [&](double p) {
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {q(0.25), q(0.5), q(0.75)};
}

SweepResult feature_sweep(const FeatureMatrix& fm, const EvaluationConfig& cfg, int max_features,
                          std::uint64_t seed) {
  fm.check_shape();
  cfg.svm.validate();
  if (!fm.values.allFinite()) throw DataError("sweep: non-finite feature values");
  const auto counts = sweep_schedule(max_features, static_cast<int>(fm.cols()));
  const auto [neg, pos] = resolve_classes(fm, cfg);

  SweepResult result;
  result.name = neg + "_vs_" + pos;
  result.negative_class = neg;
  result.positive_class = pos;
  for (int c : counts) result.points.push_back({c, {}, {}, {}, {}, {}});

  const auto scrambled = scramble_labels(fm, cfg.class_key, derive_seed(seed, "scrambled-labels"));
  for (int pass = 0; pass < 2; ++pass) {
    const FeatureMatrix& data = pass == 0 ? fm : scrambled;
    const Eigen::VectorXi y = class_vector(data, cfg.class_key, neg, pos);
    const auto folds = make_folds(data, y);
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto ranked = rank_features(data, cfg.class_key, folds[f].train);
      const Rows cols = top_columns(ranked, counts.back());
      FoldGram gram = init_gram(folds[f]);
      for (auto& point : result.points) {
        gram.add(data.values, cols, point.n_features);
        const auto it = score_fold(folds[f], gram, y, cfg, derive_seed(seed, "inner-cv", f));
        (pass == 0 ? point.accuracies : point.scrambled_accuracies).push_back(it.accuracy);
      }
    }
  }
  for (auto& point : result.points) {
    point.real = quartiles(point.accuracies);
    point.scrambled = quartiles(point.scrambled_accuracies);
    point.test = compare_to_baseline(point.accuracies, point.scrambled_accuracies);
  }
  return result;
}

int best_feature_count(const std::vector<SweepResult>& sweeps) {
  std::map<int, int> significant;
  for (const auto& s : sweeps) {
    for (const auto& p : s.points) significant[p.n_features] += p.test.p_lt_0_003 ? 1 : 0;
  }
  if (significant.empty()) throw DataError("sweep: no points");
  int best = significant.begin()->first;
  int best_n = -1;
  for (const auto& [count, n] : significant) {
    if (n > best_n) {
      best_n = n;
      best = count;
    }
  }
  return best;
}

nlohmann::json to_json(const SweepResult& sweep) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : sweep.points) {
    points.push_back({{"n_features", p.n_features},
                      {"accuracies", p.accuracies},
                      {"scrambled_accuracies", p.scrambled_accuracies},
                      {"real", quartiles_json(p.real)},
                      {"scrambled", quartiles_json(p.scrambled)},
                      {"real_vs_scrambled", test_json(p.test)}});
  }
  return {{"name", sweep.name}, {"negative_class", sweep.negative_class}, {"positive_class", sweep.positive_class}, {"points", points}};
}

void write_sweep_csv(const std::vector<SweepResult>& sweeps, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "comparison,negative_class,positive_class,n_features,median,q1,q3,scrambled_median,scrambled_q1,scrambled_q3,h,p\n";
  const auto num = [](double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  for (const auto& s : sweeps) {
    for (const auto& p : s.points) {
      out << s.name << ',' << s.negative_class << ',' << s.positive_class << ',' << p.n_features << ',' << num(p.real.median) << ','
          << num(p.real.q1) << ',' << num(p.real.q3) << ',' << num(p.scrambled.median) << ','
          << num(p.scrambled.q1) << ',' << num(p.scrambled.q3) << ',' << num(p.test.h) << ',' << num(p.test.p)
          << '\n';
    }
  }
}

std::vector<SweepResult> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("comparison,negative_class,positive_class,n_features", 0) != 0) {
    throw DataError(path.string() + ": not a sweep CSV");
  }
  std::vector<SweepResult> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) f.push_back(line.substr(start, pos - start));
    f.push_back(line.substr(start));
    if (f.size() != 12) throw DataError(path.string() + ": line " + std::to_string(line_no) + " needs 12 fields");
    std::vector<double> v;
    for (std::size_t i = 3; i < f.size(); ++i) {
      double x = 0.0;
      const auto r = std::from_chars(f[i].data(), f[i].data() + f[i].size(), x);
      if (r.ec != std::errc{} || r.ptr != f[i].data() + f[i].size()) {
        throw DataError(path.string() + ": bad number '" + f[i] + "' on line " + std::to_string(line_no));
      }
      v.push_back(x);
    }
    if (out.empty() || out.back().name != f[0]) out.push_back({f[0], f[1], f[2], {}});
    SweepPoint p;
    p.n_features = static_cast<int>(v[0]);
    p.real = {v[2], v[1], v[3]};
    p.scrambled = {v[5], v[4], v[6]};
    p.test.h = v[7];
    p.test.p = v[8];
    p.test.p_lt_0_003 = p.test.p < 0.003;
    p.test.p_lt_0_0006 = p.test.p < 0.0006;
    out.back().points.push_back(std::move(p));
  }
  return out;
}

}  // namespace eegdecode
