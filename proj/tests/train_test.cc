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

#include "pb/error.h"
#include "pb/train.h"
#include "pb/util.h"
#include "testkit.h"

namespace pb::train {
namespace {

Matrix UnitRows(int n, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0, 1);
  Matrix m(n, d);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = unit(rng);
    m.row(i).normalize();
  }
  return m;
}

TEST(Loss, SinglePairIsExactlyZero) {
  Matrix a = UnitRows(1, 5, 1), b = UnitRows(1, 5, 2);
  EXPECT_EQ(ContrastiveLoss(a, b, 0.07), 0.0);
  EXPECT_EQ(ContrastiveLoss(a, b, 1.0), 0.0);
}

TEST(Loss, UniformSimilarityGivesLogN) {
  Matrix same = Matrix::Zero(4, 3);
  same.col(0).setOnes();
  EXPECT_NEAR(ContrastiveLoss(same, same, 0.07), std::log(4.0), 1e-9);
}

TEST(Loss, AlignedOrthogonalPair) {
  Matrix eye = Matrix::Identity(2, 2);
  EXPECT_NEAR(ContrastiveLoss(eye, eye, 1.0), std::log(1.0 + std::exp(-1.0)), 1e-9);
}

// Hand-computed two-pair batch with asymmetric similarities.
TEST(Loss, HandComputedAsymmetricBatch) {
  Matrix a(2, 2), b(2, 2);
  a << 1, 0, 0, 1;
  const double c = std::cos(0.5), s = std::sin(0.5);
  b << 1, 0, c, s;
  // S = [[1, c], [0, s]] at tau = 1.
  const double rows = (std::log(std::exp(1) + std::exp(c)) - 1) +
                      (std::log(1 + std::exp(s)) - s);
  const double cols = (std::log(std::exp(1) + 1) - 1) +
                      (std::log(std::exp(c) + std::exp(s)) - s);
  EXPECT_NEAR(ContrastiveLoss(a, b, 1.0), (rows + cols) / 4.0, 1e-12);
}

TEST(Loss, PreconditionErrors) {
  Matrix a = UnitRows(3, 4, 1);
  auto code = [&](const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code([&] { ContrastiveLoss(a, a, 0.0); }), ErrorCode::kNonPositiveTemperature);
  EXPECT_EQ(code([&] { ContrastiveLoss(a, a, -1.0); }), ErrorCode::kNonPositiveTemperature);
  EXPECT_EQ(code([&] { ContrastiveLoss(a, UnitRows(2, 4, 1), 1.0); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(code([&] { ContrastiveLoss(2 * a, a, 1.0); }), ErrorCode::kNotNormalized);
}

// Nonnegativity, symmetry in the two modalities, invariance to a joint
// permutation of the batch, and the ln n bound on an uninformative batch.
TEST(Loss, Properties) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const int d = 2 + static_cast<int>(rng() % 8);
    const double tau = std::uniform_real_distribution<double>(0.05, 2.0)(rng);
    Matrix a = UnitRows(n, d, rng()), b = UnitRows(n, d, rng());
    const double loss = ContrastiveLoss(a, b, tau);
    EXPECT_GE(loss, -1e-12);
    EXPECT_NEAR(ContrastiveLoss(b, a, tau), loss, 1e-9);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + n, rng);
    EXPECT_NEAR(ContrastiveLoss(perm * a, perm * b, tau), loss, 1e-9);
    // Gradients of the unit-vector loss are zero-sum across rows of G.
    LossWithGrad g = ContrastiveLossWithGrad(a, b, tau);
    EXPECT_EQ(g.d_nl_hats.rows(), n);
    EXPECT_TRUE(g.d_nl_hats.allFinite());
  }
}

TEST(Gradients, MatchFiniteDifferences) {
  for (int n : {2, 8}) {
    for (int d_in : {6, 16}) {
      for (int d : {4, 8}) {
        for (double tau : {0.07, 1.0}) {
          testkit::GradCheck c = testkit::CheckGradients(n, d_in, d, tau, 100 + n * d_in + d);
          EXPECT_LT(c.max_relative_error, 1e-5)
              << "n=" << n << " d_in=" << d_in << " d=" << d << " tau=" << tau;
        }
      }
    }
  }
}

TEST(Gradients, NoBiasMeansZeroBiasGradient) {
  std::mt19937_64 rng(2);
  Heads heads;
  heads.f = embed::ProjectionHead::Initialize(5, 3, rng, false);
  heads.g = embed::ProjectionHead::Initialize(5, 3, rng, false);
  Matrix x = Matrix::Random(4, 5), y = Matrix::Random(4, 5);
  HeadGradients g = LossGradients(x, y, heads, 0.5);
  EXPECT_TRUE(g.d_bias_f.isZero());
  EXPECT_TRUE(g.d_bias_g.isZero());
  EXPECT_NEAR(g.loss, BatchLoss(x, y, heads, 0.5), 1e-15);
}

TrainConfig SmallConfig() {
  TrainConfig c;
  c.d = 16;
  c.batch_size = 8;
  c.epochs = 4;
  c.learning_rate = 1e-2;
  c.seed = 5;
  return c;
}

testkit::SyntheticOptions SmallDims() { return {8, 24, 40, 0.05, 2, 4}; }

TEST(Fit, DeterministicForSeed) {
  auto base = testkit::MakeSyntheticBase(30, 1, "s", SmallDims());
  FitResult a = Fit(base, SmallConfig());
  FitResult b = Fit(base, SmallConfig());
  EXPECT_EQ(HeadDigest(a.heads), HeadDigest(b.heads));
  EXPECT_EQ(a.history.ToJsonl(), b.history.ToJsonl());
  TrainConfig other = SmallConfig();
  other.seed = 6;
  EXPECT_NE(HeadDigest(Fit(base, other).heads), HeadDigest(a.heads));
}

TEST(Fit, StepsDropIncompleteBatchAndLossFalls) {
  auto base = testkit::MakeSyntheticBase(30, 1, "s", SmallDims());
  std::vector<int> seen;
  FitOptions opts;
  opts.on_step = [&](const StepRecord& r) { seen.push_back(r.step); };
  FitResult r = Fit(base, SmallConfig(), opts);
  EXPECT_EQ(r.history.steps.size(), 4u * (30 / 8));
  EXPECT_EQ(seen.size(), r.history.steps.size());
  EXPECT_EQ(r.history.steps.back().epoch, 3);
  double first = 0, last = 0;
  for (int i = 0; i < 3; ++i) {
    first += r.history.steps[i].batch_loss;
    last += r.history.steps[r.history.steps.size() - 1 - i].batch_loss;
  }
  EXPECT_LT(last, first);
  EXPECT_EQ(r.history.Summary()["steps"], 12);
}

TEST(Fit, BatchCappedAtPairCount) {
  auto base = testkit::MakeSyntheticBase(5, 1, "s", SmallDims());
  TrainConfig c = SmallConfig();
  c.batch_size = 256;
  FitResult r = Fit(base, c);
  EXPECT_EQ(r.effective_batch_size, 5);
  EXPECT_EQ(r.history.steps.size(), 4u);
}

TEST(Fit, ZeroEpochsReturnsInitialHeads) {
  auto base = testkit::MakeSyntheticBase(5, 1, "s", SmallDims());
  TrainConfig c = SmallConfig();
  c.epochs = 0;
  FitResult r = Fit(base, c);
  EXPECT_EQ(HeadDigest(r.heads), HeadDigest(InitializeHeads(24, 40, c)));
}

TEST(Fit, RejectsBadInputs) {
  auto base = testkit::MakeSyntheticBase(5, 1, "s", SmallDims());
  TrainConfig c = SmallConfig();
  c.temperature = 0;
  EXPECT_THROW(Fit(base, c), Error);
  EXPECT_THROW(Fit(testkit::MakeSyntheticBase(1, 1, "s", SmallDims()), SmallConfig()), Error);
  base.fl_state_vectors.erase("s0001");
  EXPECT_THROW(Fit(base, SmallConfig()), Error);
}

TEST(Checkpoint, RoundTripAndEpochFiles) {
  auto dir = testkit::MakeTempDir("ckpt");
  auto base = testkit::MakeSyntheticBase(16, 1, "s", SmallDims());
  FitOptions opts;
  opts.checkpoint_dir = dir / "epochs";
  FitResult r = Fit(base, SmallConfig(), opts);
  EXPECT_TRUE(std::filesystem::exists(dir / "epochs" / "epoch-004.ckpt"));
  SaveCheckpoint(r.heads, SmallConfig(), dir / "heads.ckpt");
  Checkpoint ck = LoadCheckpoint(dir / "heads.ckpt");
  EXPECT_EQ(HeadDigest(ck.heads), HeadDigest(r.heads));
  EXPECT_EQ(ReadFile(dir / "epochs" / "epoch-004.ckpt"), ReadFile(dir / "heads.ckpt"));
  EXPECT_FALSE(ck.digest_mismatch);
  EXPECT_EQ(ck.config.Digest(), SmallConfig().Digest());
  ck.ExpectDims(24, 40, 16);
  EXPECT_THROW(ck.ExpectDims(24, 40, 32), Error);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, CorruptionDetected) {
  std::mt19937_64 rng(1);
  Heads heads{embed::ProjectionHead::Initialize(3, 2, rng),
              embed::ProjectionHead::Initialize(4, 2, rng)};
  std::string bytes = EncodeCheckpoint(heads, SmallConfig());
  auto code = [](std::string_view b) {
    try {
      DecodeCheckpoint(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidArgument;
  };
  EXPECT_EQ(code(bytes.substr(0, bytes.size() - 8)), ErrorCode::kCorruptCheckpoint);
  EXPECT_EQ(code("garbage"), ErrorCode::kCorruptCheckpoint);
  EXPECT_EQ(code("{\"format\":\"other\"}\n"), ErrorCode::kCorruptCheckpoint);
  std::string tampered = ReplaceAll(bytes, "\"temperature\":0.07", "\"temperature\":0.08");
  ASSERT_NE(tampered, bytes);
  EXPECT_TRUE(DecodeCheckpoint(tampered).digest_mismatch);
}

TEST(Config, DigestAndJsonRoundTrip) {
  TrainConfig c = SmallConfig();
  EXPECT_EQ(TrainConfig::FromJson(c.ToJson()).Digest(), c.Digest());
  Config file = Config::Parse("[train]\nbatch_size = 32\noptimizer = \"sgd\"\n");
  TrainConfig f = TrainConfig::FromConfig(file);
  EXPECT_EQ(f.batch_size, 32);
  EXPECT_EQ(f.optimizer, OptimizerKind::kSgd);
  EXPECT_EQ(f.temperature, 0.07);
  EXPECT_THROW(TrainConfig::FromConfig(Config::Parse("[train]\noptimizer = \"lion\"\n")), Error);
}

}  // namespace
}  // namespace pb::train
