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

#include "pb/train.h"

#include <chrono>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "pb/error.h"
#include "pb/util.h"

namespace pb::train {
namespace {

using nlohmann::ordered_json;

void CheckUnitRows(const Matrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m.row(i).norm() - 1.0) > embed::kUnitTolerance) {
      throw Error(ErrorCode::kNotNormalized,
                  std::string(what) + " row " + std::to_string(i) +
                      " is not unit length");
    }
  }
}

// Row-wise log-sum-exp with max subtraction.
Vector RowLse(const Matrix& s) {
  Vector out(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double m = s.row(i).maxCoeff();
    out(i) = m + std::log((s.row(i).array() - m).exp().sum());
  }
  return out;
}

Matrix RowSoftmax(const Matrix& s, const Vector& lse) {
  Matrix p(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    p.row(i) = (s.row(i).array() - lse(i)).exp();
  }
  return p;
}

struct Forward {
  Matrix u;      // Pre-normalization projections, one per row.
  Vector norms;  // Row norms of u.
  Matrix hats;   // u / norms.
};

Forward ProjectRows(const Matrix& x, const embed::ProjectionHead& head) {
  if (x.cols() != head.in_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "batch has dim " + std::to_string(x.cols()) +
                    " for head with " + std::to_string(head.in_dim()));
  }
  Forward f;
  f.u = x * head.weights.transpose();
  if (head.use_bias) f.u.rowwise() += head.bias.transpose();
  f.norms = f.u.rowwise().norm();
  f.hats.resize(f.u.rows(), f.u.cols());
  for (Eigen::Index i = 0; i < f.u.rows(); ++i) {
    if (!(f.norms(i) > embed::kNormEpsilon)) {
      throw Error(ErrorCode::kZeroVector,
                  "projection of batch row " + std::to_string(i) +
                      " vanished");
    }
    f.hats.row(i) = f.u.row(i) / f.norms(i);
  }
  return f;
}

// Back through v -> v / |v| and the affine map.
void BackwardHead(const Forward& f, const Matrix& x, const Matrix& d_hats,
                  bool use_bias, Matrix* d_weights, Vector* d_bias) {
  Matrix du(d_hats.rows(), d_hats.cols());
  for (Eigen::Index i = 0; i < du.rows(); ++i) {
    const double proj = f.hats.row(i).dot(d_hats.row(i));
    du.row(i) = (d_hats.row(i) - proj * f.hats.row(i)) / f.norms(i);
  }
  *d_weights = du.transpose() * x;
  *d_bias = use_bias ? Vector(du.colwise().sum().transpose())
                     : Vector::Zero(du.cols());
}

double GradNorm(const Matrix& w, const Vector& b) {
  return std::sqrt(w.squaredNorm() + b.squaredNorm());
}

void AppendHead(const embed::ProjectionHead& h, std::string* out) {
  for (Eigen::Index r = 0; r < h.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < h.weights.cols(); ++c) {
      double v = h.weights(r, c);
      out->append(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
  for (Eigen::Index r = 0; r < h.bias.size(); ++r) {
    double v = h.bias(r);
    out->append(reinterpret_cast<const char*>(&v), sizeof v);
  }
}

std::string HeadPayload(const Heads& heads) {
  std::string out;
  AppendHead(heads.f, &out);
  AppendHead(heads.g, &out);
  return out;
}

ordered_json HeadDims(const embed::ProjectionHead& h) {
  return {{"in_dim", h.in_dim()},
          {"out_dim", h.out_dim()},
          {"bias", h.use_bias}};
}

Error Corrupt(const std::string& what) {
  return Error(ErrorCode::kCorruptCheckpoint, what);
}

class Optimizer {
 public:
  Optimizer(const TrainConfig& config, const Heads& heads) : config_(config) {
    for (const auto* h : {&heads.f, &heads.g}) {
      m_w_.push_back(Matrix::Zero(h->weights.rows(), h->weights.cols()));
      v_w_.push_back(m_w_.back());
      m_b_.push_back(Vector::Zero(h->bias.size()));
      v_b_.push_back(m_b_.back());
    }
  }

  void Step(const HeadGradients& g, Heads* heads) {
    ++t_;
    Update(0, g.d_weights_f, g.d_bias_f, &heads->f);
    Update(1, g.d_weights_g, g.d_bias_g, &heads->g);
  }

 private:
  void Update(int k, const Matrix& dw, const Vector& db,
              embed::ProjectionHead* head) {
    const double lr = config_.learning_rate;
    if (config_.optimizer == OptimizerKind::kSgd) {
      head->weights -= lr * dw;
      if (head->use_bias) head->bias -= lr * db;
      return;
    }
    const double b1 = config_.adam_beta1;
    const double b2 = config_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, t_);
    const double c2 = 1.0 - std::pow(b2, t_);
    const double eps = config_.adam_epsilon;
    m_w_[k] = b1 * m_w_[k] + (1.0 - b1) * dw;
    v_w_[k] = b2 * v_w_[k] + (1.0 - b2) * dw.cwiseProduct(dw);
    head->weights.array() -=
        lr * (m_w_[k].array() / c1) / ((v_w_[k].array() / c2).sqrt() + eps);
    if (head->use_bias) {
      m_b_[k] = b1 * m_b_[k] + (1.0 - b1) * db;
      v_b_[k] = b2 * v_b_[k] + (1.0 - b2) * db.cwiseProduct(db);
      head->bias.array() -=
          lr * (m_b_[k].array() / c1) / ((v_b_[k].array() / c2).sqrt() + eps);
    }
  }

  TrainConfig config_;
  long long t_ = 0;
  std::vector<Matrix> m_w_, v_w_;
  std::vector<Vector> m_b_, v_b_;
};

}  // namespace

void TrainConfig::Validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::kNonPositiveTemperature,
                "temperature must be positive");
  }
  if (batch_size < 2) {
    throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 2");
  }
  if (epochs < 0) throw Error(ErrorCode::kInvalidArgument, "epochs < 0");
  if (!(learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning_rate must be positive");
  }
  if (d < 1) throw Error(ErrorCode::kInvalidArgument, "d must be positive");
  if (optimizer == OptimizerKind::kAdam &&
      (adam_beta1 < 0 || adam_beta1 >= 1 || adam_beta2 < 0 ||
       adam_beta2 >= 1 || adam_epsilon <= 0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad adam parameters");
  }
}

ordered_json TrainConfig::ToJson() const {
  return {{"temperature", temperature},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"learning_rate", learning_rate},
          {"optimizer", optimizer == OptimizerKind::kAdam ? "adam" : "sgd"},
          {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2},
          {"adam_epsilon", adam_epsilon},
          {"seed", seed},
          {"d", d},
          {"use_bias", use_bias},
          {"include_initial_state", include_initial_state}};
}

std::string TrainConfig::Digest() const { return Sha256Hex(ToJson().dump()); }

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  TrainConfig c;
  c.temperature = j.value("temperature", c.temperature);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  std::string opt = j.value("optimizer", std::string("adam"));
  if (opt == "adam") {
    c.optimizer = OptimizerKind::kAdam;
  } else if (opt == "sgd") {
    c.optimizer = OptimizerKind::kSgd;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown optimizer " + opt);
  }
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_epsilon = j.value("adam_epsilon", c.adam_epsilon);
  c.seed = j.value("seed", c.seed);
  c.d = j.value("d", c.d);
  c.use_bias = j.value("use_bias", c.use_bias);
  c.include_initial_state =
      j.value("include_initial_state", c.include_initial_state);
  return c;
}

TrainConfig TrainConfig::FromConfig(const Config& config) {
  TrainConfig c;
  c.temperature = config.GetDouble("train.temperature", c.temperature);
  c.batch_size =
      static_cast<int>(config.GetInt("train.batch_size", c.batch_size));
  c.epochs = static_cast<int>(config.GetInt("train.epochs", c.epochs));
  c.learning_rate = config.GetDouble("train.learning_rate", c.learning_rate);
  std::string opt = config.GetString("train.optimizer", "adam");
  if (opt == "adam") {
    c.optimizer = OptimizerKind::kAdam;
  } else if (opt == "sgd") {
    c.optimizer = OptimizerKind::kSgd;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown optimizer " + opt);
  }
  c.adam_beta1 = config.GetDouble("train.adam_beta1", c.adam_beta1);
  c.adam_beta2 = config.GetDouble("train.adam_beta2", c.adam_beta2);
  c.adam_epsilon = config.GetDouble("train.adam_epsilon", c.adam_epsilon);
  c.seed = static_cast<std::uint64_t>(
      config.GetInt("train.seed", static_cast<long long>(c.seed)));
  c.d = static_cast<int>(config.GetInt("train.d", c.d));
  c.use_bias = config.GetBool("train.use_bias", c.use_bias);
  c.include_initial_state =
      config.GetBool("train.include_initial_state", c.include_initial_state);
  return c;
}

Heads InitializeHeads(int nl_dim, int fl_dim, const TrainConfig& config) {
  std::mt19937_64 rng(config.seed);
  Heads heads;
  heads.f = embed::ProjectionHead::Initialize(nl_dim, config.d, rng,
                                              config.use_bias);
  heads.g = embed::ProjectionHead::Initialize(fl_dim, config.d, rng,
                                              config.use_bias);
  return heads;
}

LossWithGrad ContrastiveLossWithGrad(const Matrix& nl_hats,
                                     const Matrix& fl_hats,
                                     double temperature) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorCode::kNonPositiveTemperature,
                "temperature must be positive");
  }
  if (nl_hats.rows() != fl_hats.rows() || nl_hats.cols() != fl_hats.cols() ||
      nl_hats.rows() < 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "loss needs two equally shaped, non-empty banks");
  }
  CheckUnitRows(nl_hats, "nl");
  CheckUnitRows(fl_hats, "fl");
  const Eigen::Index n = nl_hats.rows();
  const Matrix s = nl_hats * fl_hats.transpose() / temperature;
  const Matrix st = s.transpose();
  const Vector lse_rows = RowLse(s);
  const Vector lse_cols = RowLse(st);

  LossWithGrad out;
  long double acc = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) {
    acc += static_cast<long double>(lse_rows(i) - s(i, i)) +
           static_cast<long double>(lse_cols(i) - s(i, i));
  }
  out.loss = static_cast<double>(acc / (2.0L * n));

  const Matrix p = RowSoftmax(s, lse_rows);
  const Matrix q = RowSoftmax(st, lse_cols).transpose();
  const Matrix g = (p + q - 2.0 * Matrix::Identity(n, n)) / (2.0 * n);
  out.d_nl_hats = g * fl_hats / temperature;
  out.d_fl_hats = g.transpose() * nl_hats / temperature;
  return out;
}

double ContrastiveLoss(const Matrix& nl_hats, const Matrix& fl_hats,
                       double temperature) {
  return ContrastiveLossWithGrad(nl_hats, fl_hats, temperature).loss;
}

double BatchLoss(const Matrix& nl_base, const Matrix& fl_pooled,
                 const Heads& heads, double temperature) {
  return ContrastiveLoss(ProjectRows(nl_base, heads.f).hats,
                         ProjectRows(fl_pooled, heads.g).hats, temperature);
}

HeadGradients LossGradients(const Matrix& nl_base, const Matrix& fl_pooled,
                            const Heads& heads, double temperature) {
  const Forward ff = ProjectRows(nl_base, heads.f);
  const Forward fg = ProjectRows(fl_pooled, heads.g);
  const LossWithGrad lg =
      ContrastiveLossWithGrad(ff.hats, fg.hats, temperature);
  HeadGradients out;
  out.loss = lg.loss;
  BackwardHead(ff, nl_base, lg.d_nl_hats, heads.f.use_bias, &out.d_weights_f,
               &out.d_bias_f);
  BackwardHead(fg, fl_pooled, lg.d_fl_hats, heads.g.use_bias,
               &out.d_weights_g, &out.d_bias_g);
  return out;
}

std::string TrainHistory::ToJsonl() const {
  std::string out;
  for (const auto& s : steps) {
    ordered_json j = {{"step", s.step},
                      {"epoch", s.epoch},
                      {"batch_loss", s.batch_loss},
                      {"grad_norm_f", s.grad_norm_f},
                      {"grad_norm_g", s.grad_norm_g}};
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

ordered_json TrainHistory::Summary() const {
  ordered_json j;
  j["steps"] = steps.size();
  j["initial_loss"] =
      steps.empty() ? ordered_json(nullptr) : ordered_json(steps.front().batch_loss);
  j["final_loss"] =
      steps.empty() ? ordered_json(nullptr) : ordered_json(steps.back().batch_loss);
  j["wall_time_s"] = wall_time_s;
  return j;
}

FitResult Fit(const embed::BaseEmbeddingSet& base, const TrainConfig& config,
              const FitOptions& options) {
  config.Validate();
  base.Validate(/*paired=*/true);
  const auto start = std::chrono::steady_clock::now();
  const std::vector<std::string> ids = base.Ids();
  const int n = static_cast<int>(ids.size());
  if (n < 2) {
    throw Error(ErrorCode::kEmptyCorpus, "training needs at least two pairs");
  }

  Matrix nl(n, base.nl_dim());
  Matrix fl(n, base.fl_dim());
  for (int i = 0; i < n; ++i) {
    nl.row(i) = base.nl_vectors.at(ids[i]).transpose();
    fl.row(i) = embed::PoolStates(base.fl_state_vectors.at(ids[i]),
                                  config.include_initial_state)
                    .transpose();
  }

  FitResult result;
  result.heads = InitializeHeads(base.nl_dim(), base.fl_dim(), config);
  result.effective_batch_size = std::min(config.batch_size, n);
  const int batch = result.effective_batch_size;
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  Optimizer optimizer(config, result.heads);
  std::vector<int> order(n);
  int step = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (int begin = 0; begin + batch <= n; begin += batch) {
      Matrix xb(batch, nl.cols());
      Matrix yb(batch, fl.cols());
      for (int i = 0; i < batch; ++i) {
        xb.row(i) = nl.row(order[begin + i]);
        yb.row(i) = fl.row(order[begin + i]);
      }
      HeadGradients g =
          LossGradients(xb, yb, result.heads, config.temperature);
      if (!std::isfinite(g.loss)) {
        throw Error(ErrorCode::kNonFiniteLoss,
                    "loss became non-finite at step " + std::to_string(step));
      }
      StepRecord rec{step, epoch, g.loss, GradNorm(g.d_weights_f, g.d_bias_f),
                     GradNorm(g.d_weights_g, g.d_bias_g)};
      result.history.steps.push_back(rec);
      if (options.on_step) options.on_step(rec);
      optimizer.Step(g, &result.heads);
      ++step;
    }
    if (!options.checkpoint_dir.empty()) {
      std::ostringstream name;
      name << "epoch-" << std::setw(3) << std::setfill('0') << epoch + 1
           << ".ckpt";
      SaveCheckpoint(result.heads, config, options.checkpoint_dir / name.str());
    }
  }
  result.history.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return result;
}

void Checkpoint::ExpectDims(int nl_in, int fl_in, int d) const {
  if (heads.f.in_dim() != nl_in || heads.g.in_dim() != fl_in ||
      heads.f.out_dim() != d || heads.g.out_dim() != d) {
    throw Error(ErrorCode::kDimensionMismatch,
                "checkpoint heads are " + std::to_string(heads.f.in_dim()) +
                    "/" + std::to_string(heads.g.in_dim()) + " -> " +
                    std::to_string(heads.f.out_dim()) + ", expected " +
                    std::to_string(nl_in) + "/" + std::to_string(fl_in) +
                    " -> " + std::to_string(d));
  }
}

std::string EncodeCheckpoint(const Heads& heads, const TrainConfig& config) {
  heads.f.Validate();
  heads.g.Validate();
  ordered_json header;
  header["format"] = "pb-heads/1";
  header["nl_head"] = HeadDims(heads.f);
  header["fl_head"] = HeadDims(heads.g);
  header["seed"] = config.seed;
  header["config"] = config.ToJson();
  header["config_digest"] = config.Digest();
  std::string out = header.dump();
  out.push_back('\n');
  out += HeadPayload(heads);
  return out;
}

Checkpoint DecodeCheckpoint(std::string_view bytes) {
  std::size_t nl = bytes.find('\n');
  if (nl == std::string_view::npos) throw Corrupt("no checkpoint header");
  Checkpoint ck;
  int dims[2][2];
  bool bias[2];
  try {
    auto h = nlohmann::json::parse(bytes.substr(0, nl));
    if (h.at("format") != "pb-heads/1") throw Corrupt("unknown format");
    const char* keys[2] = {"nl_head", "fl_head"};
    for (int k = 0; k < 2; ++k) {
      dims[k][0] = h.at(keys[k]).at("out_dim").get<int>();
      dims[k][1] = h.at(keys[k]).at("in_dim").get<int>();
      bias[k] = h.at(keys[k]).at("bias").get<bool>();
      if (dims[k][0] < 1 || dims[k][1] < 1) throw Corrupt("bad head dims");
    }
    ck.config = TrainConfig::FromJson(h.at("config"));
    ck.config_digest = h.at("config_digest").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Corrupt(std::string("bad checkpoint header: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorruptCheckpoint) throw;
    throw Corrupt(e.what());
  }
  ck.digest_mismatch = ck.config_digest != ck.config.Digest();
  std::size_t expected = 0;
  for (auto& d : dims) {
    expected += static_cast<std::size_t>(d[0]) * (d[1] + 1) * sizeof(double);
  }
  std::string_view payload = bytes.substr(nl + 1);
  if (payload.size() != expected) {
    throw Corrupt("checkpoint payload holds " +
                  std::to_string(payload.size()) + " bytes, expected " +
                  std::to_string(expected));
  }
  const char* p = payload.data();
  auto read = [&p] {
    double v;
    std::memcpy(&v, p, sizeof v);
    p += sizeof v;
    return v;
  };
  embed::ProjectionHead* heads[2] = {&ck.heads.f, &ck.heads.g};
  for (int k = 0; k < 2; ++k) {
    heads[k]->weights.resize(dims[k][0], dims[k][1]);
    heads[k]->bias.resize(dims[k][0]);
    heads[k]->use_bias = bias[k];
    for (int r = 0; r < dims[k][0]; ++r) {
      for (int c = 0; c < dims[k][1]; ++c) heads[k]->weights(r, c) = read();
    }
    for (int r = 0; r < dims[k][0]; ++r) heads[k]->bias(r) = read();
  }
  return ck;
}

void SaveCheckpoint(const Heads& heads, const TrainConfig& config,
                    const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeCheckpoint(heads, config));
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path) {
  return DecodeCheckpoint(ReadFile(path));
}

std::string HeadDigest(const Heads& heads) {
  return Sha256Hex(HeadPayload(heads));
}

}  // namespace pb::train
