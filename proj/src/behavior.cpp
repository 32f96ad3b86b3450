#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "eegdecode/error.hpp"
#include "eegdecode/stats.hpp"

namespace eegdecode {

namespace {

constexpr const char* kCsvHeader = "subject,condition,task,n_correct,n_submitted,duration_s";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& what, int line_no) {
  T v{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw DataError("behavioral CSV line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

void validate(const BehavioralRecord& rec) {
  if (rec.n_correct < 0 || rec.n_correct > rec.n_submitted) {
    throw DataError("behavioral record: need 0 <= n_correct <= n_submitted");
  }
  if (!(rec.duration_s > 0.0) || !std::isfinite(rec.duration_s)) {
    throw DataError("behavioral record: duration must be positive");
  }
}

double response_accuracy(const BehavioralRecord& rec) {
  if (rec.n_submitted < 1) throw DataError("response accuracy: no submitted responses");
  validate(rec);
  return static_cast<double>(rec.n_correct) / rec.n_submitted;
}

double inverse_efficiency_score(double rt, double pe) {
  if (!(rt > 0.0)) throw DataError("IES: rt must be positive");
  if (!(pe >= 0.0 && pe < 1.0)) throw DataError("IES: proportion of error must lie in [0, 1)");
  return rt / (1.0 - pe);
}

const std::vector<BehavioralMetric>& behavioral_metrics() {
  static const std::vector<BehavioralMetric> all{BehavioralMetric::Accuracy, BehavioralMetric::NCorrect,
                                                 BehavioralMetric::Duration, BehavioralMetric::Ies};
  return all;
}

std::string to_string(BehavioralMetric metric) {
  switch (metric) {
    case BehavioralMetric::Accuracy: return "accuracy";
    case BehavioralMetric::NCorrect: return "n_correct";
    case BehavioralMetric::Duration: return "duration_s";
    case BehavioralMetric::Ies: return "ies";
  }
  return "?";
}

BehavioralMetric parse_behavioral_metric(const std::string& s) {
  for (auto m : behavioral_metrics()) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown behavioral metric '" + s + "'");
}

double metric_value(const BehavioralRecord& rec, BehavioralMetric metric) {
  switch (metric) {
    case BehavioralMetric::Accuracy: return response_accuracy(rec);
    case BehavioralMetric::NCorrect:
      validate(rec);
      return rec.n_correct;
    case BehavioralMetric::Duration:
      validate(rec);
      return rec.duration_s;
    case BehavioralMetric::Ies: return inverse_efficiency_score(rec.duration_s, 1.0 - response_accuracy(rec));
  }
  return 0.0;
}

std::vector<TaskComparison> compare_conditions(const std::vector<BehavioralRecord>& records,
                                               BehavioralMetric metric) {
  if (records.empty()) throw DataError("compare_conditions: no records");
  std::set<std::string> conditions;
  std::map<std::string, std::map<std::string, std::vector<double>>> by_task;
  for (const auto& r : records) {
    conditions.insert(r.condition);
    by_task[r.task][r.condition].push_back(metric_value(r, metric));
  }
  if (conditions.size() < 2) throw DataError("compare_conditions: need at least 2 conditions");
  std::vector<TaskComparison> out;
  for (const auto& [task, groups] : by_task) {
    TaskComparison tc;
    tc.task = task;
    tc.metric = metric;
    std::vector<std::vector<double>> values;
    for (const auto& c : conditions) {
      const auto it = groups.find(c);
      if (it == groups.end()) {
        throw DataError("compare_conditions: task '" + task + "' has no data for condition '" + c + "'");
      }
      tc.conditions.push_back(c);
      values.push_back(it->second);
    }
    tc.result = kruskal_wallis(values);
    out.push_back(std::move(tc));
  }
  return out;
}

nlohmann::json behavioral_report(const std::vector<BehavioralRecord>& records) {
  std::vector<TaskComparison> all;
  for (auto m : behavioral_metrics()) {
    auto part = compare_conditions(records, m);
    all.insert(all.end(), part.begin(), part.end());
  }
  const int n_tests = static_cast<int>(all.size());
  const double family = bonferroni_threshold(0.05, n_tests);
  const double strict_family = bonferroni_threshold(0.01, n_tests);
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& tc : all) {
    tests.push_back({{"task", tc.task},
                     {"metric", to_string(tc.metric)},
                     {"conditions", tc.conditions},
                     {"group_sizes", tc.result.group_sizes},
                     {"h", tc.result.h},
                     {"p", tc.result.p},
                     {"p_lt_0.05", tc.result.p < 0.05},
                     {"p_lt_0.01", tc.result.p < 0.01},
                     {"bonferroni_significant", tc.result.p < family},
                     {"bonferroni_significant_0.01", tc.result.p < strict_family}});
  }
  return {{"format_version", 1}, {"n_tests", n_tests}, {"bonferroni_threshold", family},
          {"bonferroni_threshold_0.01", strict_family}, {"tests", tests}};
}

std::vector<BehavioralRecord> load_behavioral_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open behavioral CSV " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("behavioral CSV is empty: " + path.string());
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw DataError(std::string("behavioral CSV header must be '") + kCsvHeader + "'");
  std::vector<BehavioralRecord> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 6) throw DataError("behavioral CSV line " + std::to_string(line_no) + ": expected 6 fields");
    BehavioralRecord r{f[0], f[1], f[2], parse_number<int>(f[3], "n_correct", line_no),
                       parse_number<int>(f[4], "n_submitted", line_no),
                       parse_number<double>(f[5], "duration_s", line_no)};
    validate(r);
    out.push_back(std::move(r));
  }
  return out;
}

void save_behavioral_csv(const std::vector<BehavioralRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, r.duration_s);
    out << r.subject << ',' << r.condition << ',' << r.task << ',' << r.n_correct << ',' << r.n_submitted << ','
        << std::string(buf, res.ptr) << '\n';
  }
}

}  // namespace eegdecode
