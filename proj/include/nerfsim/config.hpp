// Copyright 2026 The nerfsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NERFSIM_CONFIG_HPP
#define NERFSIM_CONFIG_HPP

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nerfsim/errors.hpp"
#include "nerfsim/geometry.hpp"

namespace nerfsim {

using Json = nlohmann::json;

/// Parses JSON text; errors carry the source name plus line/column.
inline Json parse_json(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

inline Json load_json(const std::filesystem::path& path) {
  std::ifstream in{path};
  if (!in) {
    throw ConfigError("cannot open '" + path.string() + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_json(text.str(), path.string());
}

/// Read-only view of a JSON object that reports the dotted path of any bad field.
class ConfigNode {
 public:
  ConfigNode(const Json& json, std::string path) : json_{&json}, path_{std::move(path)} {
    if (!json.is_object()) {
      fail("", "expected an object");
    }
  }

  [[nodiscard]] const std::string& path() const { return path_; }
  [[nodiscard]] const Json& json() const { return *json_; }
  [[nodiscard]] bool has(const std::string& key) const { return json_->contains(key) && !(*json_)[key].is_null(); }

  [[nodiscard]] ConfigNode child(const std::string& key) const { return ConfigNode{require(key), join(key)}; }

  [[nodiscard]] double number(const std::string& key) const {
    const Json& v = require(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      fail(key, "expected a finite number");
    }
    return v.get<double>();
  }
  [[nodiscard]] double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  [[nodiscard]] double positive(const std::string& key) const {
    const double v = number(key);
    if (!(v > 0.0)) {
      fail(key, "expected a positive number");
    }
    return v;
  }
  [[nodiscard]] double positive(const std::string& key, double fallback) const {
    return has(key) ? positive(key) : fallback;
  }

  [[nodiscard]] double non_negative(const std::string& key, double fallback) const {
    const double v = number(key, fallback);
    if (v < 0.0) {
      fail(key, "expected a non-negative number");
    }
    return v;
  }

  [[nodiscard]] long long integer(const std::string& key) const {
    const Json& v = require(key);
    if (!v.is_number_integer()) {
      fail(key, "expected an integer");
    }
    return v.get<long long>();
  }
  [[nodiscard]] long long integer(const std::string& key, long long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  [[nodiscard]] bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) {
      return fallback;
    }
    const Json& v = (*json_)[key];
    if (!v.is_boolean()) {
      fail(key, "expected true or false");
    }
    return v.get<bool>();
  }

  [[nodiscard]] std::string string(const std::string& key) const {
    const Json& v = require(key);
    if (!v.is_string()) {
      fail(key, "expected a string");
    }
    return v.get<std::string>();
  }
  [[nodiscard]] std::string string(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
  }

  template <int N>
  [[nodiscard]] Eigen::Matrix<double, N, 1> vector(const std::string& key) const {
    const Json& v = require(key);
    if (!v.is_array() || v.size() != N) {
      fail(key, "expected an array of " + std::to_string(N) + " numbers");
    }
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
      if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
        fail(key, "expected an array of " + std::to_string(N) + " finite numbers");
      }
      out[i] = v[i].get<double>();
    }
    return out;
  }
  [[nodiscard]] Vec3 vec3(const std::string& key) const { return vector<3>(key); }
  [[nodiscard]] Vec2 vec2(const std::string& key) const { return vector<2>(key); }

  /// Color triple with every channel in [0, 1].
  [[nodiscard]] Vec3 color(const std::string& key) const {
    const Vec3 c = vec3(key);
    if ((c.array() < 0.0).any() || (c.array() > 1.0).any()) {
      fail(key, "color channels must lie in [0, 1]");
    }
    return c;
  }

  /// Elements of an array of objects; an absent key yields an empty list.
  [[nodiscard]] std::vector<ConfigNode> objects(const std::string& key) const {
    std::vector<ConfigNode> out;
    if (!has(key)) {
      return out;
    }
    const Json& v = (*json_)[key];
    if (!v.is_array()) {
      fail(key, "expected an array");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.emplace_back(v[i], join(key) + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  /// Raw array at `key`; an absent key yields an empty array.
  [[nodiscard]] const Json& array(const std::string& key) const {
    static const Json empty = Json::array();
    if (!has(key)) {
      return empty;
    }
    const Json& v = (*json_)[key];
    if (!v.is_array()) {
      fail(key, "expected an array");
    }
    return v;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    const std::string where = key.empty() ? path_ : join(key);
    throw ConfigError((where.empty() ? std::string("<root>") : where) + ": " + message);
  }

  [[nodiscard]] std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const Json& require(const std::string& key) const {
    if (!has(key)) {
      fail(key, "missing required field");
    }
    return (*json_)[key];
  }

  const Json* json_;
  std::string path_;
};

/// Applies a `dotted.key=value` override. The value is parsed as JSON when possible, else taken as a string.
inline void apply_override(Json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const Json::parse_error&) {
    value = text;
  }
  Json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) {
      throw ConfigError("override '" + assignment + "': empty key segment");
    }
    if (node->is_null()) {
      *node = Json::object();
    }
    if (node->is_array()) {
      std::size_t index = 0;
      try {
        index = std::stoul(part);
      } catch (const std::exception&) {
        throw ConfigError("override '" + assignment + "': '" + part + "' is not an array index");
      }
      if (index >= node->size()) {
        throw ConfigError("override '" + assignment + "': index " + part + " out of range");
      }
      node = &(*node)[index];
    } else if (node->is_object()) {
      node = &(*node)[part];
    } else {
      throw ConfigError("override '" + assignment + "': '" + part + "' is inside a non-object value");
    }
    if (dot == std::string::npos) {
      break;
    }
    start = dot + 1;
  }
  *node = std::move(value);
}

/// Resolves `relative` against the directory holding `config_file`; absolute paths pass through.
inline std::filesystem::path resolve_path(const std::filesystem::path& config_file, const std::string& relative) {
  const std::filesystem::path p{relative};
  if (p.is_absolute()) {
    return p;
  }
  return config_file.parent_path() / p;
}

}  // namespace nerfsim

#endif
