#pragma once

#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "eegdecode/error.hpp"

namespace eegdecode::detail {

/// Reads a JSON object field by field and rejects keys nobody asked for.
class StrictObject {
 public:
  StrictObject(const nlohmann::json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(context_ + ": expected a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void optional(const std::string& key, T& out) {
    if (has(key)) out = convert<T>(key);
  }

  template <typename T>
  T required(const std::string& key) {
    if (!has(key)) throw ConfigError(context_ + ": missing required key '" + key + "'");
    return convert<T>(key);
  }

  const nlohmann::json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string path(const std::string& key) const { return context_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(context_ + ": unknown key '" + item.key() + "'");
    }
  }

 private:
  template <typename T>
  T convert(const std::string& key) const {
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(context_ + ": bad value for '" + key + "': " + e.what());
    }
  }

  nlohmann::json j_;
  std::string context_;
  std::set<std::string> seen_;
};

}  // namespace eegdecode::detail
