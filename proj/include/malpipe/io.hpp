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

#pragma once

#include <string>

#include "malpipe/dataset.hpp"

namespace malpipe::io {

enum class Format { csv, mfbin };

// By extension: ".csv" -> csv, anything else -> mfbin.
Format format_for_path(const std::string& path);

// CSV: header "f0,...,f{d-1},label", decimal floats, label in {0,1}.
// mfbin: magic "MFB1", u32le col_count, u64le row_count, row-major f32le
// features, then row_count u8 labels.
// Row ids are assigned as 0-based file positions. Parse failures name the
// offending row/column. `require_labels=false` accepts a CSV without the
// label column (labels default to 0); mfbin always carries labels.
Dataset load_dataset(const std::string& path, Format format, bool require_labels = true);

void save_dataset(const Dataset& data, const std::string& path, Format format);

}  // namespace malpipe::io
