// Copyright 2026 The slotmem Authors
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

#include "slotmem/model/layers.h"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace slotmem::model {

using namespace ad;  // NOLINT: op vocabulary

Matrix XavierInit(int in, int out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> u(-limit, limit);
  Matrix m(in, out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

Matrix NormalInit(int rows, int cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

Linear::Linear(ParameterStore& store, const std::string& prefix, int in,
               int out, std::mt19937_64& rng, bool bias)
    : in_(in), out_(out) {
  w_ = &store.Create(prefix + ".w", XavierInit(in, out, rng));
  if (bias) b_ = &store.Create(prefix + ".b", Matrix::Zero(1, out));
}

Var Linear::operator()(Tape& t, Var x) const {
  Var y = MatMul(x, t.Leaf(*w_));
  return b_ ? AddRow(y, t.Leaf(*b_)) : y;
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& prefix,
                     int dim) {
  gain_ = &store.Create(prefix + ".gain", Matrix::Ones(1, dim));
  bias_ = &store.Create(prefix + ".bias", Matrix::Zero(1, dim));
}

Var LayerNorm::operator()(Tape& t, Var x) const {
  return LayerNormRows(x, t.Leaf(*gain_), t.Leaf(*bias_));
}

Mlp::Mlp(ParameterStore& store, const std::string& prefix, int in, int hidden,
         int out, std::mt19937_64& rng)
    : fc1_(store, prefix + ".fc1", in, hidden, rng),
      fc2_(store, prefix + ".fc2", hidden, out, rng) {}

Var Mlp::operator()(Tape& t, Var x) const { return fc2_(t, Gelu(fc1_(t, x))); }

GruCell::GruCell(ParameterStore& store, const std::string& prefix, int in,
                 int hidden, std::mt19937_64& rng)
    : x_rz_(store, prefix + ".x_rz", in, 2 * hidden, rng),
      h_rz_(store, prefix + ".h_rz", hidden, 2 * hidden, rng, false),
      x_n_(store, prefix + ".x_n", in, hidden, rng),
      h_n_(store, prefix + ".h_n", hidden, hidden, rng),
      hidden_(hidden) {}

Var GruCell::operator()(Tape& t, Var x, Var h) const {
  Var rz = Sigmoid(Add(x_rz_(t, x), h_rz_(t, h)));
  Var r = SliceCols(rz, 0, hidden_);
  Var z = SliceCols(rz, hidden_, hidden_);
  Var n = Tanh(Add(x_n_(t, x), Mul(r, h_n_(t, h))));
  // h' = (1 - z) * n + z * h
  return Add(n, Mul(z, Sub(h, n)));
}

CrossAttention::CrossAttention(ParameterStore& store, const std::string& prefix,
                               int q_dim, int kv_dim, int heads,
                               std::mt19937_64& rng)
    : q_(store, prefix + ".q", q_dim, q_dim, rng, false),
      k_(store, prefix + ".k", kv_dim, q_dim, rng, false),
      v_(store, prefix + ".v", kv_dim, q_dim, rng, false),
      o_(store, prefix + ".o", q_dim, q_dim, rng),
      heads_(heads),
      dim_(q_dim) {
  if (heads < 1 || q_dim % heads != 0) {
    throw std::invalid_argument(prefix + ": width not divisible by heads");
  }
}

AttentionResult CrossAttention::operator()(Tape& t, Var queries,
                                           Var inputs) const {
  Var q = q_(t, queries);
  Var k = k_(t, inputs);
  Var v = v_(t, inputs);
  const int dh = dim_ / heads_;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outs;
  AttentionResult res;
  res.weights = Matrix::Zero(queries.rows(), inputs.rows());
  for (int h = 0; h < heads_; ++h) {
    Var qh = heads_ == 1 ? q : SliceCols(q, h * dh, dh);
    Var kh = heads_ == 1 ? k : SliceCols(k, h * dh, dh);
    Var vh = heads_ == 1 ? v : SliceCols(v, h * dh, dh);
    Var w = SoftmaxRows(Scale(MatMulBT(qh, kh), scale));
    if (!w.value().allFinite()) throw std::runtime_error("non-finite attention");
    res.weights += w.value() / heads_;
    outs.push_back(MatMul(w, vh));
  }
  res.out = o_(t, heads_ == 1 ? outs[0] : ConcatCols(outs));
  return res;
}

}  // namespace slotmem::model
