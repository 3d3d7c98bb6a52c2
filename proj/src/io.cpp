// Copyright 2026 The Malpipe Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "malpipe/io.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <vector>

namespace malpipe::io {

namespace {

constexpr char kMagic[4] = {'M', 'F', 'B', '1'};

[[noreturn]] void parse_fail(const std::string& path, size_t row, size_t col,
                             const std::string& what) {
  throw DataError(path + ": " + what + " at row " + std::to_string(row) +
                  ", column " + std::to_string(col));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  size_t start = 0;
  while (true) {
    size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

Dataset load_csv(const std::string& path, bool require_labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file, expected header");
  strip_cr(line);
  auto header = split_line(line);

  bool has_label = !header.empty() && header.back() == "label";
  if (!has_label && require_labels)
    throw DataError(path + ": malformed header, last column must be \"label\"");
  const size_t d = has_label ? header.size() - 1 : header.size();
  if (d == 0) throw DataError(path + ": malformed header, no feature columns");
  for (size_t j = 0; j < d; ++j) {
    if (header[j] != "f" + std::to_string(j))
      throw DataError(path + ": malformed header, expected column \"f" +
                      std::to_string(j) + "\", found \"" + header[j] + "\"");
  }

  Dataset out;
  out.n_cols = d;
  size_t row = 0;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_line(line);
    const size_t expected = d + (has_label ? 1 : 0);
    if (cells.size() != expected)
      throw DataError(path + ": row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(expected));
    for (size_t j = 0; j < d; ++j) {
      float v;
      const char* first = cells[j].data();
      const char* last = first + cells[j].size();
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc{} || p != last)
        parse_fail(path, row, j, "non-numeric cell \"" + cells[j] + "\"");
      out.features.push_back(v);
    }
    uint8_t label = 0;
    if (has_label) {
      const std::string& cell = cells[d];
      if (cell == "0") label = 0;
      else if (cell == "1") label = 1;
      else parse_fail(path, row, d, "label \"" + cell + "\" outside {0,1}");
    }
    out.labels.push_back(label);
    out.row_ids.push_back(row);
    ++row;
  }
  return out;
}

Dataset load_mfbin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError(path + ": bad magic, not an mfbin file");

  uint32_t col_count = 0;
  uint64_t row_count = 0;
  in.read(reinterpret_cast<char*>(&col_count), sizeof(col_count));
  in.read(reinterpret_cast<char*>(&row_count), sizeof(row_count));
  if (!in) throw DataError(path + ": truncated mfbin header");
  if (col_count == 0) throw DataError(path + ": mfbin declares zero columns");

  Dataset out;
  out.n_cols = col_count;
  out.features.resize(static_cast<size_t>(row_count) * col_count);
  in.read(reinterpret_cast<char*>(out.features.data()),
          static_cast<std::streamsize>(out.features.size() * sizeof(float)));
  if (!in) throw DataError(path + ": truncated mfbin feature block");

  out.labels.resize(row_count);
  in.read(reinterpret_cast<char*>(out.labels.data()),
          static_cast<std::streamsize>(row_count));
  if (!in) throw DataError(path + ": truncated mfbin label block");
  for (size_t r = 0; r < row_count; ++r) {
    if (out.labels[r] > 1)
      throw DataError(path + ": label " + std::to_string(out.labels[r]) +
                      " outside {0,1} at row " + std::to_string(r));
  }

  out.row_ids.resize(row_count);
  for (size_t r = 0; r < row_count; ++r) out.row_ids[r] = r;
  return out;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  for (size_t j = 0; j < data.n_cols; ++j) out << 'f' << j << ',';
  out << "label\n";
  char buf[64];
  for (size_t r = 0; r < data.rows(); ++r) {
    for (size_t j = 0; j < data.n_cols; ++j) {
      auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), data.at(r, j));
      out.write(buf, p - buf);
      out.put(',');
    }
    out << int(data.labels[r]) << '\n';
  }
  if (!out) throw DataError("write failed: " + path);
}

void save_mfbin(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(kMagic, 4);
  const uint32_t cols = static_cast<uint32_t>(data.n_cols);
  const uint64_t rows = data.rows();
  out.write(reinterpret_cast<const char*>(&cols), sizeof(cols));
  out.write(reinterpret_cast<const char*>(&rows), sizeof(rows));
  out.write(reinterpret_cast<const char*>(data.features.data()),
            static_cast<std::streamsize>(data.features.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(data.labels.data()),
            static_cast<std::streamsize>(data.labels.size()));
  if (!out) throw DataError("write failed: " + path);
}

}  // namespace

Format format_for_path(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0)
    return Format::csv;
  return Format::mfbin;
}

Dataset load_dataset(const std::string& path, Format format, bool require_labels) {
  return format == Format::csv ? load_csv(path, require_labels) : load_mfbin(path);
}

void save_dataset(const Dataset& data, const std::string& path, Format format) {
  if (format == Format::csv)
    save_csv(data, path);
  else
    save_mfbin(data, path);
}

}  // namespace malpipe::io
