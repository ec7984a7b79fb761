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

#ifndef PB_TRAIN_H_
#define PB_TRAIN_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pb/config.h"
#include "pb/embed.h"

namespace pb::train {

using embed::Matrix;
using embed::Vector;

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  double temperature = 0.07;
  int batch_size = 256;
  int epochs = 10;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  int d = embed::kJointDim;
  bool use_bias = true;
  bool include_initial_state = true;

  void Validate() const;
  nlohmann::ordered_json ToJson() const;
  std::string Digest() const;
  static TrainConfig FromJson(const nlohmann::json& j);
  // Reads the `train.*` keys, falling back to the defaults above.
  static TrainConfig FromConfig(const Config& config);
};

struct Heads {
  embed::ProjectionHead f;  // NL side.
  embed::ProjectionHead g;  // FL side.
};

Heads InitializeHeads(int nl_dim, int fl_dim, const TrainConfig& config);

// Symmetric InfoNCE over row-paired unit vectors (rows of `nl_hats` and
// `fl_hats`), logits = cosine / tau.
double ContrastiveLoss(const Matrix& nl_hats, const Matrix& fl_hats,
                       double temperature);

struct LossWithGrad {
  double loss = 0.0;
  Matrix d_nl_hats;
  Matrix d_fl_hats;
};

// Loss and its gradient with respect to the normalized inputs.
LossWithGrad ContrastiveLossWithGrad(const Matrix& nl_hats,
                                     const Matrix& fl_hats,
                                     double temperature);

struct HeadGradients {
  double loss = 0.0;
  Matrix d_weights_f;
  Vector d_bias_f;
  Matrix d_weights_g;
  Vector d_bias_g;
};

// Forward pass from base rows (n x D_nl and n x D_fl pooled) through both
// heads and normalization.
double BatchLoss(const Matrix& nl_base, const Matrix& fl_pooled,
                 const Heads& heads, double temperature);

// Analytic gradients of BatchLoss with respect to every head parameter.
HeadGradients LossGradients(const Matrix& nl_base, const Matrix& fl_pooled,
                            const Heads& heads, double temperature);

struct StepRecord {
  int step = 0;
  int epoch = 0;
  double batch_loss = 0.0;
  double grad_norm_f = 0.0;
  double grad_norm_g = 0.0;
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  double wall_time_s = 0.0;

  std::string ToJsonl() const;
  nlohmann::ordered_json Summary() const;
};

struct FitOptions {
  // When set, heads are written to `epoch-NNN.ckpt` after every epoch.
  std::filesystem::path checkpoint_dir;
  std::function<void(const StepRecord&)> on_step;
};

struct FitResult {
  Heads heads;
  TrainHistory history;
  int effective_batch_size = 0;
};

// Trains both heads on every paired id of `base` in ascending id order.
// The batch size is capped at the number of pairs.
FitResult Fit(const embed::BaseEmbeddingSet& base, const TrainConfig& config,
              const FitOptions& options = {});

struct Checkpoint {
  Heads heads;
  TrainConfig config;
  std::string config_digest;
  bool digest_mismatch = false;

  // Throws DimensionMismatch unless the heads map nl_in/fl_in to d.
  void ExpectDims(int nl_in, int fl_in, int d) const;
};

std::string EncodeCheckpoint(const Heads& heads, const TrainConfig& config);
Checkpoint DecodeCheckpoint(std::string_view bytes);
void SaveCheckpoint(const Heads& heads, const TrainConfig& config,
                    const std::filesystem::path& path);
Checkpoint LoadCheckpoint(const std::filesystem::path& path);

// SHA-256 over the checkpoint payload of both heads.
std::string HeadDigest(const Heads& heads);

}  // namespace pb::train

#endif  // PB_TRAIN_H_
