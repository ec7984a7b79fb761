// Copyright 2026 The pb Authors.
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

#include "pb/tensor_io.h"

#include <bit>
#include <cstring>
#include <numeric>

#include "json.hpp"
#include "pb/error.h"
#include "pb/util.h"

namespace pb::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "pbvec payloads are written in host order");

using nlohmann::ordered_json;

Error Corrupt(const std::string& what) {
  return Error(ErrorCode::kIo, "malformed pbvec: " + what);
}

}  // namespace

std::string_view DTypeName(DType dtype) {
  return dtype == DType::kF32 ? "f32" : "f64";
}

std::int64_t Tensor::NumElements() const {
  if (shape.empty()) return 0;
  return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                         std::multiplies<>());
}

std::string EncodeTensor(const Tensor& t) {
  if (static_cast<std::int64_t>(t.data.size()) != t.NumElements()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "tensor data does not match its shape");
  }
  if (!t.rows.empty()) {
    if (t.rows.size() != t.ids.size() || t.shape.empty() ||
        std::accumulate(t.rows.begin(), t.rows.end(), std::int64_t{0}) !=
            t.shape[0]) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "per-id row counts do not cover the tensor");
    }
  } else if (!t.ids.empty() &&
             (t.shape.empty() ||
              static_cast<std::int64_t>(t.ids.size()) != t.shape[0])) {
    throw Error(ErrorCode::kDimensionMismatch, "one id per row expected");
  }
  ordered_json manifest;
  manifest["dtype"] = DTypeName(t.dtype);
  manifest["shape"] = t.shape;
  manifest["ids"] = t.ids;
  if (!t.rows.empty()) manifest["rows"] = t.rows;
  std::string out = manifest.dump();
  out.push_back('\n');
  std::size_t width = t.dtype == DType::kF32 ? 4 : 8;
  std::size_t header = out.size();
  out.resize(header + t.data.size() * width);
  char* p = out.data() + header;
  for (double v : t.data) {
    if (t.dtype == DType::kF32) {
      float f = static_cast<float>(v);
      std::memcpy(p, &f, 4);
    } else {
      std::memcpy(p, &v, 8);
    }
    p += width;
  }
  return out;
}

Tensor DecodeTensor(std::string_view bytes) {
  std::size_t nl = bytes.find('\n');
  if (nl == std::string_view::npos) throw Corrupt("no manifest line");
  Tensor t;
  try {
    auto m = nlohmann::json::parse(bytes.substr(0, nl));
    std::string dtype = m.at("dtype").get<std::string>();
    if (dtype == "f32") {
      t.dtype = DType::kF32;
    } else if (dtype == "f64") {
      t.dtype = DType::kF64;
    } else {
      throw Corrupt("unknown dtype " + dtype);
    }
    t.shape = m.at("shape").get<std::vector<std::int64_t>>();
    t.ids = m.value("ids", std::vector<std::string>{});
    t.rows = m.value("rows", std::vector<std::int64_t>{});
  } catch (const nlohmann::json::exception& e) {
    throw Corrupt(e.what());
  }
  for (auto d : t.shape) {
    if (d < 0) throw Corrupt("negative dimension");
  }
  std::size_t width = t.dtype == DType::kF32 ? 4 : 8;
  std::size_t n = static_cast<std::size_t>(t.NumElements());
  std::string_view payload = bytes.substr(nl + 1);
  if (payload.size() != n * width) {
    throw Corrupt("payload holds " + std::to_string(payload.size()) +
                  " bytes, expected " + std::to_string(n * width));
  }
  t.data.resize(n);
  const char* p = payload.data();
  for (std::size_t i = 0; i < n; ++i, p += width) {
    if (t.dtype == DType::kF32) {
      float f;
      std::memcpy(&f, p, 4);
      t.data[i] = f;
    } else {
      std::memcpy(&t.data[i], p, 8);
    }
  }
  if (!t.rows.empty() &&
      (t.rows.size() != t.ids.size() || t.shape.empty() ||
       std::accumulate(t.rows.begin(), t.rows.end(), std::int64_t{0}) !=
           t.shape[0])) {
    throw Corrupt("row counts do not cover the tensor");
  }
  return t;
}

void SaveTensor(const Tensor& tensor, const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeTensor(tensor));
}

Tensor LoadTensor(const std::filesystem::path& path) {
  return DecodeTensor(ReadFile(path));
}

}  // namespace pb::io
