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

// Small trainable building blocks. Each layer registers its parameters in a
// ParameterStore under "<prefix>.<name>" and applies them on a Tape.

#ifndef SLOTMEM_MODEL_LAYERS_H_
#define SLOTMEM_MODEL_LAYERS_H_

#include <random>
#include <string>

#include "slotmem/ad/ops.h"
#include "slotmem/ad/tape.h"

namespace slotmem::model {

using ad::Matrix;
using ad::ParameterStore;
using ad::Parameter;
using ad::Tape;
using ad::Var;

// Xavier-uniform initialised in x out matrix.
Matrix XavierInit(int in, int out, std::mt19937_64& rng);
Matrix NormalInit(int rows, int cols, double stddev, std::mt19937_64& rng);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore& store, const std::string& prefix, int in, int out,
         std::mt19937_64& rng, bool bias = true);

  Var operator()(Tape& t, Var x) const;
  int in() const { return in_; }
  int out() const { return out_; }
  Parameter& weight() const { return *w_; }
  Parameter* bias() const { return b_; }

 private:
  Parameter* w_ = nullptr;
  Parameter* b_ = nullptr;
  int in_ = 0;
  int out_ = 0;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore& store, const std::string& prefix, int dim);
  Var operator()(Tape& t, Var x) const;

 private:
  Parameter* gain_ = nullptr;
  Parameter* bias_ = nullptr;
};

// Linear -> GELU -> Linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterStore& store, const std::string& prefix, int in, int hidden,
      int out, std::mt19937_64& rng);
  Var operator()(Tape& t, Var x) const;

 private:
  Linear fc1_;
  Linear fc2_;
};

// Gated recurrent unit applied row-wise: each row of `x` updates the
// matching row of `h`.
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParameterStore& store, const std::string& prefix, int in, int hidden,
          std::mt19937_64& rng);
  Var operator()(Tape& t, Var x, Var h) const;

 private:
  Linear x_rz_, h_rz_, x_n_, h_n_;
  int hidden_ = 0;
};

struct AttentionResult {
  Var out;      // queries x dim
  Matrix weights;  // queries x keys, averaged over heads
};

// Multi-head scaled dot-product attention with softmax over keys. Queries of
// width `q_dim` attend to inputs of width `kv_dim`; output width is q_dim.
class CrossAttention {
 public:
  CrossAttention() = default;
  CrossAttention(ParameterStore& store, const std::string& prefix, int q_dim,
                 int kv_dim, int heads, std::mt19937_64& rng);
  AttentionResult operator()(Tape& t, Var queries, Var inputs) const;

 private:
  Linear q_, k_, v_, o_;
  int heads_ = 1;
  int dim_ = 0;
};

}  // namespace slotmem::model

#endif  // SLOTMEM_MODEL_LAYERS_H_
