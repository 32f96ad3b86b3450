#include "eegdecode/feature_matrix.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eegdecode/error.hpp"

namespace eegdecode {

namespace fs = std::filesystem;

std::string FeatureDescriptor::to_string() const {
  if (kind == FeatureKind::BandPower) return "bp:" + channel + ":" + band;
  return "pdc:" + channel + "->" + sink + ":" + band;
}

FeatureDescriptor FeatureDescriptor::parse(const std::string& s) {
  FeatureDescriptor d;
  const auto last = s.rfind(':');
  if (s.rfind("bp:", 0) == 0 && last > 3) {
    d.kind = FeatureKind::BandPower;
    d.channel = s.substr(3, last - 3);
    d.band = s.substr(last + 1);
    return d;
  }
  if (s.rfind("pdc:", 0) == 0 && last > 4) {
    d.kind = FeatureKind::Pdc;
    const std::string pair = s.substr(4, last - 4);
    const auto arrow = pair.find("->");
    if (arrow == std::string::npos) throw DataError("bad PDC descriptor '" + s + "'");
    d.channel = pair.substr(0, arrow);
    d.sink = pair.substr(arrow + 2);
    d.band = s.substr(last + 1);
    return d;
  }
  throw DataError("bad feature descriptor '" + s + "'");
}

const std::string& label_value(const WindowLabel& l, LabelKey key) {
  switch (key) {
    case LabelKey::Subject:
      return l.subject;
    case LabelKey::Condition:
      return l.condition;
    case LabelKey::Task:
      return l.task;
  }
  return l.condition;
}

void FeatureMatrix::check_shape() const {
  if (static_cast<std::size_t>(values.cols()) != features.size()) {
    throw DataError("feature matrix: descriptor count differs from column count");
  }
  if (static_cast<std::size_t>(values.rows()) != labels.size()) {
    throw DataError("feature matrix: label count differs from row count");
  }
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<Eigen::Index>& rows) const {
  FeatureMatrix out;
  out.features = features;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), values.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = values.row(rows[i]);
    out.labels.push_back(labels[static_cast<std::size_t>(rows[i])]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<Eigen::Index>& cols) const {
  FeatureMatrix out;
  out.labels = labels;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    out.values.col(static_cast<Eigen::Index>(j)) = values.col(cols[j]);
    out.features.push_back(features[static_cast<std::size_t>(cols[j])]);
  }
  return out;
}

std::vector<std::string> FeatureMatrix::subjects() const {
  std::vector<std::string> out;
  std::map<std::string, int> seen;
  for (const auto& l : labels) {
    if (seen.emplace(l.subject, 0).second) out.push_back(l.subject);
  }
  return out;
}

FeatureMatrix hconcat(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.labels != b.labels) throw DataError("hconcat: row labels differ");
  FeatureMatrix out;
  out.labels = a.labels;
  out.features = a.features;
  out.features.insert(out.features.end(), b.features.begin(), b.features.end());
  out.values.resize(a.rows(), a.cols() + b.cols());
  out.values << a.values, b.values;
  return out;
}

FeatureMatrix vconcat(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows() == 0) return b;
  if (b.rows() == 0) return a;
  if (a.features != b.features) throw DataError("vconcat: feature descriptors differ");
  FeatureMatrix out;
  out.features = a.features;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.values.resize(a.rows() + b.rows(), a.cols());
  out.values << a.values, b.values;
  return out;
}

fs::path labels_sidecar(const fs::path& csv_path) {
  return fs::path(csv_path.string() + ".labels.json");
}

void write_feature_csv(const FeatureMatrix& fm, const fs::path& csv_path) {
  fm.check_shape();
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + csv_path.string());
  for (std::size_t j = 0; j < fm.features.size(); ++j) {
    if (j) out << ',';
    out << fm.features[j].to_string();
  }
  out << '\n';
  char buf[64];
  std::string line;
  for (Eigen::Index i = 0; i < fm.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < fm.cols(); ++j) {
      if (j) line += ',';
      const auto res = std::to_chars(buf, buf + sizeof(buf), fm.values(i, j));
      line.append(buf, res.ptr);
    }
    out << line << '\n';
  }
  if (!out) throw DataError("write failed: " + csv_path.string());

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& l : fm.labels) {
    rows.push_back({{"subject", l.subject}, {"condition", l.condition}, {"task", l.task}, {"start_s", l.start_s}});
  }
  std::ofstream side(labels_sidecar(csv_path), std::ios::trunc);
  side << nlohmann::json{{"format_version", 1}, {"rows", rows}}.dump(1) << '\n';
  if (!side) throw DataError("write failed: " + labels_sidecar(csv_path).string());
}

FeatureMatrix read_feature_csv(const fs::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open " + csv_path.string());
  FeatureMatrix fm;
  std::string line;
  if (!std::getline(in, line)) throw DataError(csv_path.string() + ": empty file");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) fm.features.push_back(FeatureDescriptor::parse(cell));
  }
  std::vector<double> flat;
  Eigen::Index rows = 0;
  const auto cols = static_cast<Eigen::Index>(fm.features.size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    Eigen::Index count = 0;
    while (p < end) {
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) throw DataError(csv_path.string() + ": bad number on row " + std::to_string(rows + 1));
      flat.push_back(v);
      ++count;
      p = res.ptr;
      if (p < end && *p == ',') ++p;
    }
    if (count != cols) throw DataError(csv_path.string() + ": wrong column count on row " + std::to_string(rows + 1));
    ++rows;
  }
  fm.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), rows, cols);

  std::ifstream side(labels_sidecar(csv_path));
  if (!side) throw DataError("missing label sidecar " + labels_sidecar(csv_path).string());
  nlohmann::json j;
  try {
    side >> j;
    for (const auto& r : j.at("rows")) {
      fm.labels.push_back({r.at("subject").get<std::string>(), r.at("condition").get<std::string>(),
                           r.at("task").get<std::string>(), r.at("start_s").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(labels_sidecar(csv_path).string() + ": " + e.what());
  }
  fm.check_shape();
  return fm;
}

}  // namespace eegdecode
