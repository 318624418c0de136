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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fpsync::csv {

/// Fixed-format double so identical runs emit byte-identical files.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

/// Minimal writer: UTF-8, comma separators, '\n' line endings, mandatory
/// header row.
class Writer {
  public:
    Writer(const std::string& path, const std::vector<std::string>& header) {
        const std::filesystem::path p(path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        out_.open(path, std::ios::binary);
        if (!out_) throw std::runtime_error("csv: cannot open " + path);
        columns_ = header.size();
        for (size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_)
            throw std::runtime_error("csv: row width does not match header");
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
    size_t columns_ = 0;
};

}  // namespace fpsync::csv
