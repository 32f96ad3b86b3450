#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace eegdecode {

enum class ChannelRole { Scalp, Eog, Other };

std::string_view to_string(ChannelRole role);
ChannelRole parse_channel_role(std::string_view s);

/// A labelled time span. Labels of the form "<condition>/<task>" name a task
/// segment; a label without a slash is a bare condition (e.g. "rest").
struct Annotation {
  double start_s = 0.0;
  double end_s = 0.0;
  std::string label;

  bool operator==(const Annotation&) const = default;
};

/// Multichannel recording. samples is [n_samples x n_channels] in volts.
struct Recording {
  Eigen::MatrixXd samples;
  double fs = 0.0;
  std::vector<std::string> channel_names;
  std::vector<ChannelRole> channel_roles;
  std::string subject_id;
  std::vector<Annotation> annotations;

  Eigen::Index n_samples() const { return samples.rows(); }
  Eigen::Index n_channels() const { return samples.cols(); }
  double duration_s() const { return static_cast<double>(samples.rows()) / fs; }

  std::vector<int> indices_with_role(ChannelRole role) const;
  std::vector<int> scalp_indices() const { return indices_with_role(ChannelRole::Scalp); }
  std::vector<int> eog_indices() const { return indices_with_role(ChannelRole::Eog); }
  std::optional<int> channel_index(std::string_view name) const;

  bool operator==(const Recording& other) const;
};

/// Throws DataError when an invariant does not hold.
void validate(const Recording& rec);

/// Electrode layout with unit-sphere positions (x right, y nasion, z up).
struct Montage {
  std::string name;
  std::vector<std::string> channel_names;
  std::vector<Eigen::Vector3d> positions;
  /// Named channel subsets shipped with the layout (e.g. "pdc28").
  std::vector<std::pair<std::string, std::vector<std::string>>> subsets;

  std::optional<int> index_of(std::string_view channel) const;
  const Eigen::Vector3d& position(std::string_view channel) const;
  const std::vector<std::string>& subset(std::string_view name) const;
};

/// One analysis window cut from an annotated segment. Holds a view into the
/// source recording rather than a copy of its samples.
struct Window {
  std::string subject;
  std::string condition;
  std::string task;
  double start_s = 0.0;
  Eigen::Index first_sample = 0;
  Eigen::Index length = 0;
  std::shared_ptr<const Recording> source;

  double fs() const { return source->fs; }
  auto data() const { return source->samples.middleRows(first_sample, length); }
};

/// Splits an annotation label into (condition, task).
std::pair<std::string, std::string> split_label(std::string_view label);

Recording load_recording(const std::filesystem::path& manifest_path);

/// Writes <dir>/<subject_id>.json and <dir>/<subject_id>.f32. Samples are
/// stored as float32, so round trips are bit-exact for float-representable data.
std::filesystem::path save_recording(const Recording& rec, const std::filesystem::path& dir);

/// Directory holding bundled data files. EEGDECODE_DATA_DIR overrides the
/// compiled-in location.
std::filesystem::path data_dir();

Montage load_montage(const std::filesystem::path& path);
Montage standard_montage(std::string_view id);

/// Number of windows a span admits: floor((span - window) / hop) + 1.
int window_count(double span_s, double window_s, double hop_s);

/// Cuts every annotated segment into windows starting at segment_start + k*hop
/// while fully inside min(span_s, segment length).
std::vector<Window> segment_windows(std::shared_ptr<const Recording> rec, double window_s,
                                    double hop_s, double span_s);

/// Same rule applied to a single annotation of rec.
std::vector<Window> segment_annotation(std::shared_ptr<const Recording> rec,
                                       const Annotation& segment, double window_s,
                                       double hop_s, double span_s);

}  // namespace eegdecode
