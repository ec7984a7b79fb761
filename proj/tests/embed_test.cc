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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "pb/embed.h"
#include "pb/error.h"
#include "testkit.h"

namespace pb::embed {
namespace {

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no pb::Error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(Head, InitializationBoundsAndDeterminism) {
  std::mt19937_64 a(7), b(7);
  ProjectionHead h = ProjectionHead::Initialize(16, 4, a);
  ProjectionHead g = ProjectionHead::Initialize(16, 4, b);
  EXPECT_EQ(h.weights, g.weights);
  EXPECT_LE(h.weights.cwiseAbs().maxCoeff(), 0.25);
  EXPECT_TRUE(h.bias.isZero());
  EXPECT_EQ(h.in_dim(), 16);
  EXPECT_EQ(h.out_dim(), 4);
  EXPECT_EQ(CodeOf([&] { ProjectionHead::Initialize(0, 4, a); }),
            ErrorCode::kInvalidArgument);
}

// Elementwise loops as the oracle for the matrix product.
TEST(Head, ProjectMatchesNaiveLoop) {
  std::mt19937_64 rng(3);
  ProjectionHead h = ProjectionHead::Initialize(6, 3, rng);
  h.bias = Vector::LinSpaced(3, 0.1, 0.3);
  Vector x = Vector::LinSpaced(6, -1.0, 1.0);
  Vector y = Project(h, x);
  for (int r = 0; r < 3; ++r) {
    double acc = h.bias(r);
    for (int c = 0; c < 6; ++c) acc += h.weights(r, c) * x(c);
    EXPECT_NEAR(y(r), acc, 1e-15);
  }
  h.use_bias = false;
  EXPECT_NEAR(Project(h, x)(0), y(0) - 0.1, 1e-15);
  EXPECT_EQ(CodeOf([&] { Project(h, Vector::Ones(5)); }), ErrorCode::kDimensionMismatch);
}

TEST(Pool, MeanWithAndWithoutInitialState) {
  Matrix s(3, 2);
  s << 3, 0,
       1, 2,
       2, 4;
  EXPECT_TRUE(PoolStates(s).isApprox(Vector((Vector(2) << 2, 2).finished())));
  EXPECT_TRUE(PoolStates(s, false).isApprox(Vector((Vector(2) << 1.5, 3).finished())));
  EXPECT_EQ(CodeOf([] { PoolStates(Matrix(0, 3)); }), ErrorCode::kEmptyTrace);
  EXPECT_EQ(CodeOf([] { PoolStates(Matrix::Ones(1, 3), false); }), ErrorCode::kEmptyTrace);
}

TEST(Normalize, UnitNormAndZeroVector) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 10);
  for (int i = 0; i < 100; ++i) {
    Vector v(8);
    for (int j = 0; j < 8; ++j) v(j) = n(rng);
    JointVector u = Normalize(v);
    EXPECT_NEAR(u.values.norm(), 1.0, kUnitTolerance);
    EXPECT_TRUE(u.normalized);
  }
  EXPECT_EQ(CodeOf([] { Normalize(Vector::Zero(4)); }), ErrorCode::kZeroVector);
}

TEST(Cosine, RangeAndPreconditions) {
  JointVector u = Normalize(Vector::Ones(4));
  EXPECT_DOUBLE_EQ(Cosine(u, u), 1.0);
  JointVector neg = Normalize(-Vector::Ones(4));
  EXPECT_DOUBLE_EQ(Cosine(u, neg), -1.0);
  JointVector raw{Vector::Ones(4), false};
  EXPECT_EQ(CodeOf([&] { Cosine(u, raw); }), ErrorCode::kNotNormalized);
  EXPECT_EQ(CodeOf([&] { Cosine(u, Normalize(Vector::Ones(3))); }),
            ErrorCode::kDimensionMismatch);
}

TEST(BaseSet, SaveLoadRoundTrip) {
  BaseEmbeddingSet base = testkit::MakeSyntheticBase(5, 9, "x", {8, 6, 10, 0.05, 1, 3});
  auto dir = testkit::MakeTempDir("embed");
  SaveBaseEmbeddings(base, dir);
  BaseEmbeddingSet back = LoadBaseEmbeddings(dir);
  EXPECT_EQ(back.Ids(), base.Ids());
  for (const auto& id : base.Ids()) {
    // f32 on disk.
    EXPECT_TRUE(back.nl_vectors.at(id).isApprox(base.nl_vectors.at(id), 1e-6));
    EXPECT_EQ(back.fl_state_vectors.at(id).rows(), base.fl_state_vectors.at(id).rows());
  }
  EXPECT_EQ(back.nl_dim(), 6);
  EXPECT_EQ(back.fl_dim(), 10);
  std::filesystem::remove_all(dir);
}

TEST(BaseSet, ValidationAndSubset) {
  BaseEmbeddingSet base = testkit::MakeSyntheticBase(3, 1, "x", {8, 4, 5, 0.05, 1, 2});
  base.Validate(true);
  BaseEmbeddingSet sub = base.Subset({"x0002"});
  EXPECT_EQ(sub.Ids(), (std::vector<std::string>{"x0002"}));
  EXPECT_EQ(CodeOf([&] { base.Subset({"nope"}); }), ErrorCode::kUnknownId);
  base.fl_state_vectors.erase("x0001");
  EXPECT_EQ(CodeOf([&] { base.Validate(true); }), ErrorCode::kUnknownId);
  base.nl_vectors["x0000"] = Vector::Ones(3);
  EXPECT_EQ(CodeOf([&] { base.Validate(false); }), ErrorCode::kDimensionMismatch);
}

TEST(Embed, EndToEndUnitVectors) {
  BaseEmbeddingSet base = testkit::MakeSyntheticBase(2, 4, "x", {8, 6, 10, 0.05, 2, 2});
  std::mt19937_64 rng(0);
  ProjectionHead f = ProjectionHead::Initialize(6, 4, rng);
  ProjectionHead g = ProjectionHead::Initialize(10, 4, rng);
  JointVector a = EmbedNl("x0000", base, f);
  JointVector b = EmbedFl("x0000", base, g);
  EXPECT_NEAR(a.values.norm(), 1.0, kUnitTolerance);
  EXPECT_NEAR(b.values.norm(), 1.0, kUnitTolerance);
  EXPECT_FALSE(EmbedFl("x0000", base, g, {false}).values.isApprox(b.values));
  EXPECT_EQ(CodeOf([&] { EmbedNl("zz", base, f); }), ErrorCode::kUnknownId);
}

}  // namespace
}  // namespace pb::embed
