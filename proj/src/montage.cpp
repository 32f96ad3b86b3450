#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "eegdecode/error.hpp"
#include "eegdecode/signal_io.hpp"

namespace eegdecode {

namespace fs = std::filesystem;

std::optional<int> Montage::index_of(std::string_view channel) const {
  for (std::size_t i = 0; i < channel_names.size(); ++i) {
    if (channel_names[i] == channel) return static_cast<int>(i);
  }
  return std::nullopt;
}

const Eigen::Vector3d& Montage::position(std::string_view channel) const {
  const auto i = index_of(channel);
  if (!i) throw DataError("channel '" + std::string(channel) + "' missing from montage " + name);
  return positions[static_cast<std::size_t>(*i)];
}

const std::vector<std::string>& Montage::subset(std::string_view subset_name) const {
  for (const auto& [key, names] : subsets) {
    if (key == subset_name) return names;
  }
  throw ConfigError("montage " + name + " has no subset '" + std::string(subset_name) + "'");
}

fs::path data_dir() {
  if (const char* env = std::getenv("EEGDECODE_DATA_DIR"); env && *env) return fs::path(env);
  return fs::path(EEGDECODE_DATA_DIR);
}

Montage load_montage(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open montage file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }

  Montage m;
  m.name = j.value("name", path.stem().string());
  std::set<std::string> seen;
  for (const auto& ch : j.at("channels")) {
    auto name = ch.at("name").get<std::string>();
    auto p = ch.at("position").get<std::vector<double>>();
    if (p.size() != 3) throw ConfigError(path.string() + ": position of " + name + " is not 3-D");
    Eigen::Vector3d v(p[0], p[1], p[2]);
    if (std::abs(v.norm() - 1.0) > 1e-6) {
      throw ConfigError(path.string() + ": position of " + name + " is not unit norm");
    }
    if (!seen.insert(name).second) {
      throw ConfigError(path.string() + ": duplicate channel " + name);
    }
    m.channel_names.push_back(std::move(name));
    m.positions.push_back(v);
  }
  if (j.contains("subsets")) {
    for (const auto& [key, names] : j.at("subsets").items()) {
      auto list = names.get<std::vector<std::string>>();
      for (const auto& n : list) {
        if (!seen.count(n)) {
          throw ConfigError(path.string() + ": subset " + key + " names unknown channel " + n);
        }
      }
      m.subsets.emplace_back(key, std::move(list));
    }
  }
  return m;
}

Montage standard_montage(std::string_view id) {
  const fs::path path = data_dir() / "montages" / (std::string(id) + ".json");
  if (id.empty() || id.find('/') != std::string_view::npos || !fs::exists(path)) {
    throw ConfigError("unknown montage id '" + std::string(id) + "'");
  }
  return load_montage(path);
}

}  // namespace eegdecode
