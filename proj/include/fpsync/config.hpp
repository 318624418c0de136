// SPDX-License-Identifier: Apache-2.0
//
// fpsync — fingerprint-spectrum CFO/TO synchronization toolkit for OFDM
// passive sensing.
// Copyright (C) 2026 the fpsync authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace fpsync {

/// Flat view of a configuration file: section -> key -> raw string value.
/// Accepts the native key = value format with [section] tables, or a JSON
/// document with one object per section.
class ConfigFile {
  public:
    static ConfigFile parse_text(const std::string& text) {
        ConfigFile c;
        std::string trimmed = text;
        const auto first = trimmed.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && trimmed[first] == '{') {
            c.load_json(nlohmann::json::parse(trimmed));
            return c;
        }
        std::istringstream in(text);
        std::string line, section;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw std::runtime_error("config: malformed section at line " +
                                             std::to_string(line_no));
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config: expected key = value at line " +
                                         std::to_string(line_no));
            c.values_[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        return c;
    }

    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_text(buf.str());
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = values_.find(section);
        return s != values_.end() && s->second.count(key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        const auto s = values_.find(section);
        if (s == values_.end()) return fallback;
        const auto k = s->second.find(key);
        return k == s->second.end() ? fallback : k->second;
    }

    double get_double(const std::string& section, const std::string& key,
                      double fallback) const {
        if (!has(section, key)) return fallback;
        return std::stod(get_string(section, key, ""));
    }

    long get_int(const std::string& section, const std::string& key, long fallback) const {
        if (!has(section, key)) return fallback;
        return std::stol(get_string(section, key, ""));
    }

    bool get_bool(const std::string& section, const std::string& key,
                  bool fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get_string(section, key, "");
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw std::runtime_error("config: bad boolean for " + section + "." + key);
    }

    std::vector<double> get_double_list(const std::string& section, const std::string& key,
                                        const std::vector<double>& fallback) const {
        if (!has(section, key)) return fallback;
        std::vector<double> out;
        for (const auto& item : split(get_string(section, key, ""), ','))
            out.push_back(std::stod(item));
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& section,
                                             const std::string& key,
                                             const std::vector<std::string>& fallback) const {
        if (!has(section, key)) return fallback;
        std::vector<std::string> out;
        for (const auto& item : split(get_string(section, key, ""), ','))
            out.push_back(trim(item));
        return out;
    }

  private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    static std::vector<std::string> split(const std::string& s, char sep) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream in(s);
        while (std::getline(in, cur, sep))
            if (!trim(cur).empty()) out.push_back(trim(cur));
        return out;
    }

    void load_json(const nlohmann::json& j) {
        for (const auto& [section, body] : j.items()) {
            if (!body.is_object())
                throw std::runtime_error("config: JSON section '" + section +
                                         "' must be an object");
            for (const auto& [key, value] : body.items()) {
                if (value.is_array()) {
                    std::string joined;
                    for (const auto& item : value) {
                        if (!joined.empty()) joined += ',';
                        joined += scalar_to_string(item);
                    }
                    values_[section][key] = joined;
                } else {
                    values_[section][key] = scalar_to_string(value);
                }
            }
        }
    }

    static std::string scalar_to_string(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }

    std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace fpsync
