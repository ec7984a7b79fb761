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

#ifndef PB_TENSOR_IO_H_
#define PB_TENSOR_IO_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pb::io {

enum class DType { kF32, kF64 };

std::string_view DTypeName(DType dtype);

// In-memory form of a `pbvec` file. Values are held as f64 whatever the
// on-disk dtype; f32 payloads widen exactly, so a load/save cycle is
// byte-exact.
//
// Layout: one line of JSON manifest
//   {"dtype":"f32","shape":[r,c],"ids":[...],"rows":[...]}
// then '\n', then r*c little-endian values in row-major order. `ids` labels
// the rows; when present, `rows[i]` says how many consecutive rows belong to
// `ids[i]` (ragged per-id blocks).
struct Tensor {
  DType dtype = DType::kF32;
  std::vector<std::int64_t> shape;
  std::vector<std::string> ids;
  std::vector<std::int64_t> rows;
  std::vector<double> data;

  std::int64_t NumElements() const;
};

std::string EncodeTensor(const Tensor& tensor);
Tensor DecodeTensor(std::string_view bytes);

void SaveTensor(const Tensor& tensor, const std::filesystem::path& path);
Tensor LoadTensor(const std::filesystem::path& path);

}  // namespace pb::io

#endif  // PB_TENSOR_IO_H_
