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

#include <bit>
#include <cstring>

#include <gtest/gtest.h>

#include "pb/error.h"
#include "pb/tensor_io.h"
#include "testkit.h"

namespace pb::io {
namespace {

Tensor Sample(DType dtype) {
  Tensor t;
  t.dtype = dtype;
  t.shape = {3, 2};
  t.ids = {"a", "b"};
  t.rows = {1, 2};
  t.data = {1.0, -2.5, 0.0, 1e-3, 3.25, -0.0};
  return t;
}

TEST(Tensor, ManifestAndPayloadLayout) {
  std::string bytes = EncodeTensor(Sample(DType::kF32));
  auto nl = bytes.find('\n');
  ASSERT_NE(nl, std::string::npos);
  EXPECT_EQ(bytes.substr(0, nl),
            R"({"dtype":"f32","shape":[3,2],"ids":["a","b"],"rows":[1,2]})");
  ASSERT_EQ(bytes.size() - nl - 1, 6 * sizeof(float));
  float second;
  std::memcpy(&second, bytes.data() + nl + 1 + sizeof(float), sizeof(float));
  EXPECT_EQ(second, -2.5f);
}

TEST(Tensor, RoundTripIsByteExact) {
  for (DType d : {DType::kF32, DType::kF64}) {
    std::string bytes = EncodeTensor(Sample(d));
    Tensor back = DecodeTensor(bytes);
    EXPECT_EQ(back.dtype, d);
    EXPECT_EQ(back.shape, (std::vector<std::int64_t>{3, 2}));
    EXPECT_EQ(back.ids, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(EncodeTensor(back), bytes);
  }
  Tensor f64 = Sample(DType::kF64);
  f64.data[3] = 0.1;
  EXPECT_EQ(DecodeTensor(EncodeTensor(f64)).data[3], 0.1);
}

TEST(Tensor, CorruptInputsAreIoErrors) {
  std::string good = EncodeTensor(Sample(DType::kF64));
  for (const std::string& bad :
       {std::string("no newline"), good.substr(0, good.size() - 1),
        std::string(R"({"dtype":"f16","shape":[0,0],"ids":[]})") + "\n",
        std::string(R"({"dtype":"f32","shape":[2,1],"ids":["a"],"rows":[3]})") +
            "\n" + std::string(8, '\0'),
        std::string("{not json\n")}) {
    try {
      DecodeTensor(bad);
      ADD_FAILURE() << bad.substr(0, 40);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kIo);
    }
  }
}

TEST(Tensor, ShapeMismatchOnEncode) {
  Tensor t = Sample(DType::kF32);
  t.data.pop_back();
  EXPECT_THROW(EncodeTensor(t), Error);
}

TEST(Tensor, FileRoundTrip) {
  auto dir = testkit::MakeTempDir("tensor");
  SaveTensor(Sample(DType::kF32), dir / "x.pbvec");
  EXPECT_EQ(LoadTensor(dir / "x.pbvec").NumElements(), 6);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace pb::io
