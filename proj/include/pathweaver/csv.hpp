// Copyright 2026 The pathweaver Authors
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

#ifndef PATHWEAVER_CSV_HPP
#define PATHWEAVER_CSV_HPP

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "pathweaver/errors.hpp"
#include "pathweaver/observations.hpp"

namespace pathweaver {

/// Shortest decimal form that parses back to the identical 64-bit double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{}) {
    throw std::invalid_argument("parse_double: cannot parse '" + std::string(s) + "'");
  }
  return v;
}

inline void split_csv_line(std::string_view line, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

/// Writes "t,x1,...,xd" rows; values round-trip bit-exactly through
/// read_observations_csv.
inline void write_observations_csv(std::ostream& os, const ObservationSet& obs) {
  os << "t";
  for (int i = 1; i <= obs.dim(); ++i) os << ",x" << i;
  os << "\n";
  for (std::size_t n = 0; n < obs.size(); ++n) {
    os << format_double(obs.time(n));
    const auto row = obs.value(n);
    for (int i = 0; i < obs.dim(); ++i) os << "," << format_double(row[i]);
    os << "\n";
  }
}

inline void write_observations_csv(const std::string& path, const ObservationSet& obs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_observations_csv(os, obs);
}

inline ObservationSet read_observations_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("observations CSV: empty file", 1);
  std::vector<std::string_view> fields;
  split_csv_line(line, fields);
  if (fields.size() < 2 || fields[0] != "t") {
    throw ConfigError("observations CSV: bad header '" + line + "'", 1);
  }
  const int dim = static_cast<int>(fields.size()) - 1;
  std::vector<double> times;
  std::vector<double> values;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    split_csv_line(line, fields);
    if (static_cast<int>(fields.size()) != dim + 1) {
      throw ConfigError("observations CSV: wrong field count", line_no);
    }
    try {
      times.push_back(parse_double(fields[0]));
      for (int i = 0; i < dim; ++i) values.push_back(parse_double(fields[i + 1]));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("observations CSV: ") + e.what(), line_no);
    }
  }
  return ObservationSet(std::move(times), std::move(values), dim);
}

inline ObservationSet read_observations_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_observations_csv(is);
}

}  // namespace pathweaver

#endif  // PATHWEAVER_CSV_HPP
