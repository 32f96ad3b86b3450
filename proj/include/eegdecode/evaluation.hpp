#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "eegdecode/feature_matrix.hpp"
#include "eegdecode/stats.hpp"
#include "eegdecode/svm.hpp"

namespace eegdecode {

/// Draws n_per_class rows from every (subject, class) cell. Without replacement
/// a short cell is an error naming the cell; with_replacement lifts that.
FeatureMatrix balance_classes(const FeatureMatrix& fm, LabelKey class_key, int n_per_class, std::uint64_t seed,
                              bool with_replacement = false);

struct KFoldResult {
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  std::vector<std::vector<Eigen::Index>> test_folds;  // row indices per fold
};

/// Stratified folds: each class is shuffled and dealt round-robin into k folds.
std::vector<std::vector<Eigen::Index>> stratified_folds(const Eigen::VectorXi& y, int k, std::uint64_t seed);

KFoldResult kfold_cv(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::VectorXi& y, int k,
                     const SvmConfig& cfg, std::uint64_t seed);

struct RocResult {
  std::vector<double> fpr;
  std::vector<double> tpr;
  double auc = 0.0;
  /// confusion(t, p): rows true class, columns predicted; index 0 negative, 1 positive.
  Eigen::Matrix2i confusion = Eigen::Matrix2i::Zero();
  Eigen::Matrix2d confusion_pct = Eigen::Matrix2d::Zero();  // row percentages
};

/// ROC by sweeping the threshold over the unique decision values; AUC by the
/// trapezoid rule. truth entries are +1 / -1; decisions >= 0 predict +1.
RocResult roc_and_confusion(const Eigen::VectorXd& decisions, const Eigen::VectorXi& truth);

struct EvaluationConfig {
  SvmConfig svm;
  LabelKey class_key = LabelKey::Condition;
  std::string negative_class;  // empty: the lexicographically smaller class
  std::string positive_class;  // empty: the other class
  int inner_folds = 5;         // 0 disables the inner cross-validation
};

nlohmann::json to_json(const EvaluationConfig& cfg);

struct IterationResult {
  std::string held_out;
  double accuracy = 0.0;
  double inner_cv_accuracy = -1.0;  // -1 when disabled
  int n_train_negative = 0;
  int n_train_positive = 0;
  int n_test_negative = 0;
  int n_test_positive = 0;
  std::vector<std::string> selected_features;
  RocResult roc;
};

struct SignificanceTest {
  double h = 0.0;
  double p = 1.0;
  bool p_lt_0_003 = false;
  bool p_lt_0_0006 = false;
};

struct EvaluationReport {
  std::string negative_class;
  std::string positive_class;
  int n_features = 0;
  std::uint64_t seed = 0;
  std::vector<IterationResult> iterations;
  std::vector<double> baseline_accuracies;
  SignificanceTest real_vs_scrambled;
  nlohmann::json config;

  std::vector<double> accuracies() const;
};

nlohmann::json to_json(const EvaluationReport& report);

/// Class values as (negative, positive) after applying the config defaults.
std::pair<std::string, std::string> resolve_classes(const FeatureMatrix& fm, const EvaluationConfig& cfg);

/// Leave-one-subject-out: for every subject, rank features on the remaining
/// subjects, keep the n_features best, train, test on the held-out subject.
/// The report's baseline fields are left empty.
EvaluationReport loso_evaluate(const FeatureMatrix& fm, const EvaluationConfig& cfg, int n_features,
                               std::uint64_t seed);

/// Labels permuted within each subject (class counts preserved).
FeatureMatrix scramble_labels(const FeatureMatrix& fm, LabelKey class_key, std::uint64_t seed);

/// LOSO accuracies after scrambling.
std::vector<double> scrambled_baseline(const FeatureMatrix& fm, const EvaluationConfig& cfg, int n_features,
                                       std::uint64_t seed);

/// KW test of real against scrambled per-iteration accuracies.
SignificanceTest compare_to_baseline(const std::vector<double>& real, const std::vector<double>& scrambled);

/// loso_evaluate + scrambled_baseline + comparison.
EvaluationReport evaluate_with_baseline(const FeatureMatrix& fm, const EvaluationConfig& cfg, int n_features,
                                        std::uint64_t seed);

/// 1..10, 15, 20, 30, ..., 400 cut at cap = min(max_features, available), ending at cap.
std::vector<int> sweep_schedule(int max_features, int available);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

/// Linear-interpolated quantiles (type 7).
Quartiles quartiles(std::vector<double> values);

struct SweepPoint {
  int n_features = 0;
  std::vector<double> accuracies;
  std::vector<double> scrambled_accuracies;
  Quartiles real;
  Quartiles scrambled;
  SignificanceTest test;
};

struct SweepResult {
  std::string name;  // comparison label used in the CSV
  std::string negative_class;
  std::string positive_class;
  std::vector<SweepPoint> points;
};

SweepResult feature_sweep(const FeatureMatrix& fm, const EvaluationConfig& cfg, int max_features,
                          std::uint64_t seed);

/// Feature count with the most comparisons significant at p < 0.003 (smallest count on ties).
int best_feature_count(const std::vector<SweepResult>& sweeps);

nlohmann::json to_json(const SweepResult& sweep);

/// One row per (comparison, count): medians, quartiles and the KW p.
/// Header: comparison,negative_class,positive_class,n_features,median,q1,q3,
/// scrambled_median,scrambled_q1,scrambled_q3,h,p
void write_sweep_csv(const std::vector<SweepResult>& sweeps, const std::filesystem::path& path);
std::vector<SweepResult> read_sweep_csv(const std::filesystem::path& path);

}  // namespace eegdecode
