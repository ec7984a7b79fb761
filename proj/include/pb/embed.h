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

#ifndef PB_EMBED_H_
#define PB_EMBED_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pb::embed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kNlDim = 384;
inline constexpr int kFlDim = 1472;
inline constexpr int kJointDim = 512;
inline constexpr double kNormEpsilon = 1e-12;
inline constexpr double kUnitTolerance = 1e-6;

// Frozen encoder outputs: one vector per NL record and one row per proof
// state (S_0..S_H) per FL record.
struct BaseEmbeddingSet {
  std::map<std::string, Vector> nl_vectors;
  std::map<std::string, Matrix> fl_state_vectors;

  int nl_dim() const;
  int fl_dim() const;
  std::vector<std::string> Ids() const;

  // Throws on non-finite entries, ragged dims, or (when `paired`) ids
  // missing from either side.
  void Validate(bool paired) const;
  // Restricts both maps to `ids`; throws UnknownId for absent ids.
  BaseEmbeddingSet Subset(const std::vector<std::string>& ids) const;
};

// Reads `nl.pbvec` and `fl.pbvec` from `dir`.
BaseEmbeddingSet LoadBaseEmbeddings(const std::filesystem::path& dir);
void SaveBaseEmbeddings(const BaseEmbeddingSet& base,
                        const std::filesystem::path& dir);

struct ProjectionHead {
  Matrix weights;  // out_dim x in_dim.
  Vector bias;     // out_dim; zeros when the bias is disabled.
  bool use_bias = true;

  int in_dim() const { return static_cast<int>(weights.cols()); }
  int out_dim() const { return static_cast<int>(weights.rows()); }

  // Uniform in [-1/sqrt(in), 1/sqrt(in)], bias zeros.
  static ProjectionHead Initialize(int in_dim, int out_dim, std::mt19937_64& rng,
                                   bool use_bias = true);
  void Validate() const;
};

struct JointVector {
  Vector values;
  bool normalized = false;
};

// Mean over rows (accumulated in long double). With `include_initial` off,
// row 0 (the bare theorem state) is skipped.
Vector PoolStates(const Matrix& states, bool include_initial = true);

Vector Project(const ProjectionHead& head, const Vector& x);

JointVector Normalize(const Vector& v);

double Cosine(const JointVector& u, const JointVector& w);

struct EmbedOptions {
  bool include_initial_state = true;
};

JointVector EmbedNl(const std::string& id, const BaseEmbeddingSet& base,
                    const ProjectionHead& head_f);
JointVector EmbedFl(const std::string& id, const BaseEmbeddingSet& base,
                    const ProjectionHead& head_g, EmbedOptions options = {});

}  // namespace pb::embed

#endif  // PB_EMBED_H_
