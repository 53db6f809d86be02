// Copyright 2026 The TRIQA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "triqa/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include "triqa/errors.hpp"

namespace triqa {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_mos(const std::string& text, size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(line_no) + ": invalid MOS '" + text + "'");
  }
  return v;
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw DataError("unterminated quote in CSV record");
  fields.push_back(trim(cur));
  return fields;
}

std::vector<double> DatasetTable::mos() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.mos);
  return out;
}

std::vector<std::filesystem::path> DatasetTable::paths() const {
  std::vector<std::filesystem::path> out;
  for (const auto& r : rows) out.push_back(r.path);
  return out;
}

std::vector<std::string> DatasetTable::names() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    out.push_back(root.empty() ? r.path.generic_string()
                               : r.path.lexically_relative(root).generic_string());
  }
  return out;
}

DatasetTable read_dataset(const std::filesystem::path& csv,
                          const std::filesystem::path& image_root, std::string name) {
  std::ifstream in(csv);
  if (!in) throw DataError("cannot open dataset table " + csv.string());
  DatasetTable table;
  table.name = name.empty() ? csv.stem().string() : std::move(name);
  table.root = image_root.empty() ? csv.parent_path() : image_root;

  std::string line;
  size_t line_no = 0;
  std::map<std::string, size_t> col;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split_csv_line(line);
    if (col.empty()) {
      for (size_t i = 0; i < fields.size(); ++i) col[fields[i]] = i;
      if (!col.contains("mos")) throw DataError(csv.string() + ": header lacks a 'mos' column");
      if (!col.contains("path") && !col.contains("distorted_path")) {
        throw DataError(csv.string() + ": header needs 'path' or 'distorted_path'");
      }
      continue;
    }
    if (fields.size() != col.size()) {
      throw DataError(csv.string() + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(col.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    auto resolve = [&](const std::string& p) {
      const std::filesystem::path path(p);
      return path.is_absolute() ? path : table.root / path;
    };
    DatasetRow row;
    row.path = resolve(fields[col.contains("path") ? col["path"] : col["distorted_path"]]);
    row.mos = parse_mos(fields[col["mos"]], line_no);
    if (col.contains("reference_path") && !fields[col["reference_path"]].empty()) {
      row.reference = resolve(fields[col["reference_path"]]);
    }
    table.rows.push_back(std::move(row));
  }
  if (col.empty()) throw DataError(csv.string() + " is empty");
  if (table.rows.empty()) throw DataError(csv.string() + " has no rows");
  const auto [lo, hi] = std::minmax_element(
      table.rows.begin(), table.rows.end(),
      [](const DatasetRow& a, const DatasetRow& b) { return a.mos < b.mos; });
  table.mos_min = lo->mos;
  table.mos_max = hi->mos;
  return table;
}

void write_dataset(const DatasetTable& table, const std::filesystem::path& csv) {
  std::ofstream out(csv);
  if (!out) throw DataError("cannot write " + csv.string());
  const bool fr = std::any_of(table.rows.begin(), table.rows.end(),
                              [](const DatasetRow& r) { return r.reference.has_value(); });
  auto rel = [&](const std::filesystem::path& p) {
    return quote(table.root.empty() ? p.generic_string()
                                    : p.lexically_relative(table.root).generic_string());
  };
  out << (fr ? "reference_path,distorted_path,mos\n" : "path,mos\n");
  for (const auto& r : table.rows) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), r.mos);
    const std::string mos(buf, res.ptr);
    if (fr) {
      out << (r.reference ? rel(*r.reference) : std::string()) << ',' << rel(r.path) << ','
          << mos << '\n';
    } else {
      out << rel(r.path) << ',' << mos << '\n';
    }
  }
  if (!out) throw DataError("failed writing " + csv.string());
}

}  // namespace triqa
