#include "eegdecode/signal_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "eegdecode/error.hpp"

namespace eegdecode {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;
constexpr double kTimeTol = 1e-9;

std::uint32_t byteswap32(std::uint32_t v) {
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

template <typename T>
T required(const json& j, const char* key, const fs::path& where) {
  if (!j.contains(key)) {
    throw DataError(where.string() + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(where.string() + ": bad field '" + key + "': " + e.what());
  }
}

}  // namespace

std::string_view to_string(ChannelRole role) {
  switch (role) {
    case ChannelRole::Scalp:
      return "scalp";
    case ChannelRole::Eog:
      return "eog";
    case ChannelRole::Other:
      return "other";
  }
  return "other";
}

ChannelRole parse_channel_role(std::string_view s) {
  if (s == "scalp") return ChannelRole::Scalp;
  if (s == "eog") return ChannelRole::Eog;
  if (s == "other") return ChannelRole::Other;
  throw DataError("unknown channel role '" + std::string(s) + "'");
}

std::vector<int> Recording::indices_with_role(ChannelRole role) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < channel_roles.size(); ++i) {
    if (channel_roles[i] == role) out.push_back(static_cast<int>(i));
  }
  return out;
}

std::optional<int> Recording::channel_index(std::string_view name) const {
  for (std::size_t i = 0; i < channel_names.size(); ++i) {
    if (channel_names[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

bool Recording::operator==(const Recording& other) const {
  if (samples.rows() != other.samples.rows() || samples.cols() != other.samples.cols()) {
    return false;
  }
  if (samples.size() > 0 &&
      std::memcmp(samples.data(), other.samples.data(), sizeof(double) * samples.size()) != 0) {
    return false;
  }
  return fs == other.fs && channel_names == other.channel_names &&
         channel_roles == other.channel_roles && subject_id == other.subject_id &&
         annotations == other.annotations;
}

void validate(const Recording& rec) {
  if (!(rec.fs > 0.0) || !std::isfinite(rec.fs)) {
    throw DataError("recording '" + rec.subject_id + "': fs must be positive");
  }
  const auto m = static_cast<std::size_t>(rec.n_channels());
  if (rec.channel_names.size() != m || rec.channel_roles.size() != m) {
    throw DataError("recording '" + rec.subject_id +
                    "': channel name/role count does not match sample columns");
  }
  const double dur = rec.duration_s();
  for (const auto& a : rec.annotations) {
    if (a.start_s < -kTimeTol || a.end_s > dur + kTimeTol || a.end_s < a.start_s) {
      throw DataError("recording '" + rec.subject_id + "': annotation '" + a.label +
                      "' outside [0, duration]");
    }
  }
  if (!rec.samples.allFinite()) {
    throw DataError("recording '" + rec.subject_id + "': non-finite sample values");
  }
}

std::pair<std::string, std::string> split_label(std::string_view label) {
  const auto slash = label.find('/');
  if (slash == std::string_view::npos) return {std::string(label), std::string()};
  return {std::string(label.substr(0, slash)), std::string(label.substr(slash + 1))};
}

Recording load_recording(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": invalid JSON: " + e.what());
  }
  if (required<int>(j, "format_version", manifest_path) != kFormatVersion) {
    throw DataError(manifest_path.string() + ": unsupported format_version");
  }

  Recording rec;
  rec.fs = required<double>(j, "fs", manifest_path);
  rec.subject_id = required<std::string>(j, "subject_id", manifest_path);
  rec.channel_names = required<std::vector<std::string>>(j, "channel_names", manifest_path);
  for (const auto& r : required<std::vector<std::string>>(j, "channel_roles", manifest_path)) {
    rec.channel_roles.push_back(parse_channel_role(r));
  }
  if (j.contains("annotations")) {
    for (const auto& a : j.at("annotations")) {
      rec.annotations.push_back({required<double>(a, "start_s", manifest_path),
                                 required<double>(a, "end_s", manifest_path),
                                 required<std::string>(a, "label", manifest_path)});
    }
  }
  const auto n = required<std::int64_t>(j, "n_samples", manifest_path);
  const auto m = static_cast<std::int64_t>(rec.channel_names.size());
  const double scale = j.value("scale", 1.0);
  if (n < 0 || !(scale > 0.0)) throw DataError(manifest_path.string() + ": bad n_samples/scale");
  if (static_cast<std::int64_t>(rec.channel_roles.size()) != m) {
    throw DataError(manifest_path.string() + ": channel_names and channel_roles differ in length");
  }

  const fs::path bin = manifest_path.parent_path() /
                       required<std::string>(j, "data_file", manifest_path);
  std::ifstream raw(bin, std::ios::binary | std::ios::ate);
  if (!raw) throw DataError("cannot open data file " + bin.string());
  const auto bytes = static_cast<std::int64_t>(raw.tellg());
  if (bytes != 4 * n * m) {
    throw DataError(bin.string() + ": dimension mismatch: expected " + std::to_string(4 * n * m) +
                    " bytes, found " + std::to_string(bytes));
  }
  raw.seekg(0);
  std::vector<std::uint32_t> words(static_cast<std::size_t>(n * m));
  raw.read(reinterpret_cast<char*>(words.data()), bytes);
  if (!raw) throw DataError("short read on " + bin.string());

  rec.samples.resize(n, m);
  for (std::int64_t s = 0; s < n; ++s) {
    for (std::int64_t c = 0; c < m; ++c) {
      std::uint32_t w = words[static_cast<std::size_t>(s * m + c)];
      if constexpr (std::endian::native == std::endian::big) w = byteswap32(w);
      const float v = std::bit_cast<float>(w);
      rec.samples(s, c) = scale == 1.0 ? static_cast<double>(v) : static_cast<double>(v) * scale;
    }
  }
  validate(rec);
  return rec;
}

fs::path save_recording(const Recording& rec, const fs::path& dir) {
  validate(rec);
  if (rec.subject_id.empty()) throw DataError("recording has empty subject_id");

  const auto n = rec.n_samples();
  const auto m = rec.n_channels();
  std::vector<std::uint32_t> words(static_cast<std::size_t>(n * m));
  for (Eigen::Index s = 0; s < n; ++s) {
    for (Eigen::Index c = 0; c < m; ++c) {
      std::uint32_t w = std::bit_cast<std::uint32_t>(static_cast<float>(rec.samples(s, c)));
      if constexpr (std::endian::native == std::endian::big) w = byteswap32(w);
      words[static_cast<std::size_t>(s * m + c)] = w;
    }
  }

  std::error_code ec;
  fs::create_directories(dir, ec);
  const std::string bin_name = rec.subject_id + ".f32";
  const fs::path bin = dir / bin_name;
  {
    std::ofstream out(bin, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + bin.string());
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
    if (!out) throw DataError("write failed: " + bin.string());
  }

  json j;
  j["format_version"] = kFormatVersion;
  j["subject_id"] = rec.subject_id;
  j["fs"] = rec.fs;
  j["n_samples"] = n;
  j["channel_names"] = rec.channel_names;
  json roles = json::array();
  for (auto r : rec.channel_roles) roles.push_back(std::string(to_string(r)));
  j["channel_roles"] = roles;
  json ann = json::array();
  for (const auto& a : rec.annotations) {
    ann.push_back({{"start_s", a.start_s}, {"end_s", a.end_s}, {"label", a.label}});
  }
  j["annotations"] = ann;
  j["data_file"] = bin_name;
  j["dtype"] = "float32-le";
  j["scale"] = 1.0;

  const fs::path manifest = dir / (rec.subject_id + ".json");
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw DataError("cannot write " + manifest.string());
  out << j.dump(1) << '\n';
  if (!out) throw DataError("write failed: " + manifest.string());
  return manifest;
}

int window_count(double span_s, double window_s, double hop_s) {
  if (!(hop_s > 0.0)) throw ConfigError("hop must be positive");
  if (!(window_s > 0.0)) throw ConfigError("window length must be positive");
  if (span_s + kTimeTol < window_s) return 0;
  return static_cast<int>(std::floor((span_s - window_s) / hop_s + kTimeTol)) + 1;
}

std::vector<Window> segment_annotation(std::shared_ptr<const Recording> rec,
                                       const Annotation& segment, double window_s,
                                       double hop_s, double span_s) {
  if (window_s > span_s + kTimeTol) {
    throw ConfigError("window length exceeds analysis span");
  }
  const double seg_len = segment.end_s - segment.start_s;
  if (seg_len + kTimeTol < window_s) {
    throw DataError("segment '" + segment.label + "' of subject '" + rec->subject_id +
                    "' is shorter than the window length");
  }
  const int count = window_count(std::min(span_s, seg_len), window_s, hop_s);
  const auto len = static_cast<Eigen::Index>(std::llround(window_s * rec->fs));
  auto [condition, task] = split_label(segment.label);

  std::vector<Window> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double start = segment.start_s + k * hop_s;
    const auto first = static_cast<Eigen::Index>(std::llround(start * rec->fs));
    if (first + len > rec->n_samples()) {
      throw DataError("window beyond end of recording '" + rec->subject_id + "'");
    }
    out.push_back(Window{rec->subject_id, condition, task, start, first, len, rec});
  }
  return out;
}

std::vector<Window> segment_windows(std::shared_ptr<const Recording> rec, double window_s,
                                    double hop_s, double span_s) {
  std::vector<Window> out;
  for (const auto& a : rec->annotations) {
    auto w = segment_annotation(rec, a, window_s, hop_s, span_s);
    out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
  }
  return out;
}

}  // namespace eegdecode
