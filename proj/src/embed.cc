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

#include "pb/embed.h"

#include <algorithm>
#include <cmath>

#include "pb/error.h"
#include "pb/tensor_io.h"

namespace pb::embed {
namespace {

bool AllFinite(const Matrix& m) { return m.allFinite(); }

std::string Shape(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

int BaseEmbeddingSet::nl_dim() const {
  return nl_vectors.empty() ? 0
                            : static_cast<int>(nl_vectors.begin()->second.size());
}

int BaseEmbeddingSet::fl_dim() const {
  return fl_state_vectors.empty()
             ? 0
             : static_cast<int>(fl_state_vectors.begin()->second.cols());
}

std::vector<std::string> BaseEmbeddingSet::Ids() const {
  std::vector<std::string> ids;
  ids.reserve(nl_vectors.size());
  for (const auto& [id, v] : nl_vectors) ids.push_back(id);
  return ids;
}

void BaseEmbeddingSet::Validate(bool paired) const {
  const int dn = nl_dim();
  for (const auto& [id, v] : nl_vectors) {
    if (v.size() != dn) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "nl vector for " + id + " has dim " + std::to_string(v.size()));
    }
    if (!v.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite nl vector for " + id);
    }
    if (paired && !fl_state_vectors.count(id)) {
      throw Error(ErrorCode::kUnknownId, "no fl states for " + id);
    }
  }
  const int df = fl_dim();
  for (const auto& [id, m] : fl_state_vectors) {
    if (m.cols() != df || m.rows() < 1) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "fl states for " + id + " have shape " +
                      Shape(m.rows(), m.cols()));
    }
    if (!AllFinite(m)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite fl state for " + id);
    }
    if (paired && !nl_vectors.count(id)) {
      throw Error(ErrorCode::kUnknownId, "no nl vector for " + id);
    }
  }
}

BaseEmbeddingSet BaseEmbeddingSet::Subset(
    const std::vector<std::string>& ids) const {
  BaseEmbeddingSet out;
  for (const auto& id : ids) {
    auto n = nl_vectors.find(id);
    auto f = fl_state_vectors.find(id);
    if (n == nl_vectors.end() || f == fl_state_vectors.end()) {
      throw Error(ErrorCode::kUnknownId, "no base embeddings for " + id);
    }
    out.nl_vectors.emplace(id, n->second);
    out.fl_state_vectors.emplace(id, f->second);
  }
  return out;
}

BaseEmbeddingSet LoadBaseEmbeddings(const std::filesystem::path& dir) {
  io::Tensor nl = io::LoadTensor(dir / "nl.pbvec");
  io::Tensor fl = io::LoadTensor(dir / "fl.pbvec");
  if (nl.shape.size() != 2 || fl.shape.size() != 2 ||
      nl.ids.size() != static_cast<std::size_t>(nl.shape[0]) ||
      fl.rows.size() != fl.ids.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "base embedding files need 2-d shapes, row ids, and fl row "
                "counts");
  }
  BaseEmbeddingSet base;
  const auto dn = nl.shape[1];
  for (std::size_t i = 0; i < nl.ids.size(); ++i) {
    Vector v(dn);
    for (Eigen::Index j = 0; j < dn; ++j) v(j) = nl.data[i * dn + j];
    if (!base.nl_vectors.emplace(nl.ids[i], std::move(v)).second) {
      throw Error(ErrorCode::kDuplicateId, nl.ids[i]);
    }
  }
  const auto df = fl.shape[1];
  std::size_t row = 0;
  for (std::size_t i = 0; i < fl.ids.size(); ++i) {
    Matrix m(fl.rows[i], df);
    for (Eigen::Index r = 0; r < m.rows(); ++r, ++row) {
      for (Eigen::Index j = 0; j < df; ++j) m(r, j) = fl.data[row * df + j];
    }
    if (!base.fl_state_vectors.emplace(fl.ids[i], std::move(m)).second) {
      throw Error(ErrorCode::kDuplicateId, fl.ids[i]);
    }
  }
  base.Validate(/*paired=*/false);
  return base;
}

void SaveBaseEmbeddings(const BaseEmbeddingSet& base,
                        const std::filesystem::path& dir) {
  base.Validate(/*paired=*/false);
  io::Tensor nl;
  nl.shape = {static_cast<std::int64_t>(base.nl_vectors.size()), base.nl_dim()};
  for (const auto& [id, v] : base.nl_vectors) {
    nl.ids.push_back(id);
    nl.data.insert(nl.data.end(), v.data(), v.data() + v.size());
  }
  io::Tensor fl;
  std::int64_t total = 0;
  for (const auto& [id, m] : base.fl_state_vectors) {
    fl.ids.push_back(id);
    fl.rows.push_back(m.rows());
    total += m.rows();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) fl.data.push_back(m(r, j));
    }
  }
  fl.shape = {total, base.fl_dim()};
  io::SaveTensor(nl, dir / "nl.pbvec");
  io::SaveTensor(fl, dir / "fl.pbvec");
}

ProjectionHead ProjectionHead::Initialize(int in_dim, int out_dim,
                                          std::mt19937_64& rng,
                                          bool use_bias) {
  if (in_dim < 1 || out_dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "head dims must be positive");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  std::uniform_real_distribution<double> dist(-bound, bound);
  ProjectionHead head;
  head.weights.resize(out_dim, in_dim);
  for (Eigen::Index r = 0; r < out_dim; ++r) {
    for (Eigen::Index c = 0; c < in_dim; ++c) head.weights(r, c) = dist(rng);
  }
  head.bias = Vector::Zero(out_dim);
  head.use_bias = use_bias;
  return head;
}

void ProjectionHead::Validate() const {
  if (bias.size() != weights.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "bias has " + std::to_string(bias.size()) + " entries for " +
                    std::to_string(weights.rows()) + " outputs");
  }
  if (!weights.allFinite() || !bias.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "head has non-finite entries");
  }
}

Vector PoolStates(const Matrix& states, bool include_initial) {
  const Eigen::Index first = include_initial ? 0 : 1;
  const Eigen::Index count = states.rows() - first;
  if (count < 1) {
    throw Error(ErrorCode::kEmptyTrace, "no proof states to pool");
  }
  if (!states.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "non-finite proof state vector");
  }
  Vector out(states.cols());
  for (Eigen::Index j = 0; j < states.cols(); ++j) {
    long double sum = 0.0L;
    for (Eigen::Index r = first; r < states.rows(); ++r) sum += states(r, j);
    out(j) = static_cast<double>(sum / static_cast<long double>(count));
  }
  return out;
}

Vector Project(const ProjectionHead& head, const Vector& x) {
  if (x.size() != head.in_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "input dim " + std::to_string(x.size()) + " for head with " +
                    std::to_string(head.in_dim()));
  }
  Vector y = head.weights * x;
  if (head.use_bias) y += head.bias;
  return y;
}

JointVector Normalize(const Vector& v) {
  const double norm = v.norm();
  if (!(norm > kNormEpsilon)) {
    throw Error(ErrorCode::kZeroVector,
                "cannot normalize a vector of norm " + std::to_string(norm));
  }
  return {v / norm, true};
}

double Cosine(const JointVector& u, const JointVector& w) {
  if (!u.normalized || !w.normalized) {
    throw Error(ErrorCode::kNotNormalized, "cosine needs unit vectors");
  }
  if (u.values.size() != w.values.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "cosine of unequal dims");
  }
  return std::clamp(u.values.dot(w.values), -1.0, 1.0);
}

JointVector EmbedNl(const std::string& id, const BaseEmbeddingSet& base,
                    const ProjectionHead& head_f) {
  auto it = base.nl_vectors.find(id);
  if (it == base.nl_vectors.end()) {
    throw Error(ErrorCode::kUnknownId, "no nl embedding for " + id);
  }
  return Normalize(Project(head_f, it->second));
}

JointVector EmbedFl(const std::string& id, const BaseEmbeddingSet& base,
                    const ProjectionHead& head_g, EmbedOptions options) {
  auto it = base.fl_state_vectors.find(id);
  if (it == base.fl_state_vectors.end()) {
    throw Error(ErrorCode::kUnknownId, "no fl states for " + id);
  }
  return Normalize(
      Project(head_g, PoolStates(it->second, options.include_initial_state)));
}

}  // namespace pb::embed
