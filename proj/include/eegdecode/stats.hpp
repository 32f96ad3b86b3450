#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegdecode/feature_matrix.hpp"

namespace eegdecode {

struct TestResult {
  double h = 0.0;
  double p = 1.0;
  std::vector<int> group_sizes;
};

/// Kruskal-Wallis H with tie correction; p from the chi-square(k-1) survival
/// function. All values identical gives H = 0, p = 1.
TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups);

struct RankedFeature {
  FeatureDescriptor feature;
  Eigen::Index column = 0;  // column in the matrix that was ranked
  double p = 1.0;
  double h = 0.0;
};

/// Two-class KW ranking of every column: ascending p, ties by descriptor string.
std::vector<RankedFeature> rank_features(const FeatureMatrix& fm, LabelKey class_key);

/// Rows restricted to the given class values before ranking (e.g. one pairwise comparison).
std::vector<RankedFeature> rank_features(const FeatureMatrix& fm, LabelKey class_key,
                                         const std::vector<Eigen::Index>& rows);

double bonferroni_threshold(double alpha, int comparisons);

struct BehavioralRecord {
  std::string subject;
  std::string condition;
  std::string task;
  int n_correct = 0;
  int n_submitted = 0;
  double duration_s = 0.0;
};

void validate(const BehavioralRecord& rec);

double response_accuracy(const BehavioralRecord& rec);

/// rt / (1 - pe).
double inverse_efficiency_score(double rt, double pe);

enum class BehavioralMetric { Accuracy, NCorrect, Duration, Ies };

const std::vector<BehavioralMetric>& behavioral_metrics();
std::string to_string(BehavioralMetric metric);
BehavioralMetric parse_behavioral_metric(const std::string& s);
double metric_value(const BehavioralRecord& rec, BehavioralMetric metric);

struct TaskComparison {
  std::string task;
  BehavioralMetric metric = BehavioralMetric::Accuracy;
  std::vector<std::string> conditions;
  TestResult result;
};

/// One KW test across conditions for every task, tasks in sorted order.
std::vector<TaskComparison> compare_conditions(const std::vector<BehavioralRecord>& records,
                                               BehavioralMetric metric);

/// Every metric for every task: raw p with 0.05 and 0.01 flags, and Bonferroni
/// flags over the total test count at family levels 0.05 and 0.01.
nlohmann::json behavioral_report(const std::vector<BehavioralRecord>& records);

/// Header: subject,condition,task,n_correct,n_submitted,duration_s
std::vector<BehavioralRecord> load_behavioral_csv(const std::filesystem::path& path);
void save_behavioral_csv(const std::vector<BehavioralRecord>& records, const std::filesystem::path& path);

nlohmann::json ranking_to_json(const std::vector<RankedFeature>& ranked, double threshold);
std::vector<RankedFeature> ranking_from_json(const nlohmann::json& j);

}  // namespace eegdecode
