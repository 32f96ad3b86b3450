#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace eegdecode {

enum class FeatureKind { BandPower, Pdc };

/// Column descriptor. Band power: channel + band. PDC: channel is the source,
/// sink the receiving electrode.
struct FeatureDescriptor {
  FeatureKind kind = FeatureKind::BandPower;
  std::string channel;
  std::string sink;
  std::string band;

  /// "bp:<channel>:<band>" or "pdc:<source>-><sink>:<band>".
  std::string to_string() const;
  static FeatureDescriptor parse(const std::string& s);
  bool operator==(const FeatureDescriptor&) const = default;
};

struct WindowLabel {
  std::string subject;
  std::string condition;
  std::string task;
  double start_s = 0.0;
  bool operator==(const WindowLabel&) const = default;
};

enum class LabelKey { Subject, Condition, Task };

const std::string& label_value(const WindowLabel& l, LabelKey key);

/// Rows are windows, columns are features.
struct FeatureMatrix {
  Eigen::MatrixXd values;
  std::vector<FeatureDescriptor> features;
  std::vector<WindowLabel> labels;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  /// Throws DataError if descriptor/label counts disagree with values.
  void check_shape() const;

  FeatureMatrix select_rows(const std::vector<Eigen::Index>& rows) const;
  FeatureMatrix select_columns(const std::vector<Eigen::Index>& cols) const;

  /// Distinct subjects in first-appearance order.
  std::vector<std::string> subjects() const;
};

/// Column-wise concatenation; labels must match row for row.
FeatureMatrix hconcat(const FeatureMatrix& a, const FeatureMatrix& b);

/// Row-wise concatenation; descriptors must match.
FeatureMatrix vconcat(const FeatureMatrix& a, const FeatureMatrix& b);

/// CSV with a header of descriptor strings; labels go to a JSON sidecar
/// (<csv path>.labels.json). Values are written with 17 significant digits.
void write_feature_csv(const FeatureMatrix& fm, const std::filesystem::path& csv_path);
FeatureMatrix read_feature_csv(const std::filesystem::path& csv_path);
std::filesystem::path labels_sidecar(const std::filesystem::path& csv_path);

}  // namespace eegdecode
