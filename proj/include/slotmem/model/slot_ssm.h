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

// Per-slot selective state-space memory and the windowed latent predictor.
//
// Every slot k owns a diagonal recurrence of width H driven only by its own
// input s_k:
//   delta = softplus(s W_delta + b_delta)
//   abar  = exp(-delta * exp(a_log))                  in (0, 1)
//   h'    = abar * h + (1 - abar) * (s W_B)
//   y     = (sigmoid(s W_g + b_g) * h') W_C
// Rows of every matrix are slots, so the joint state is block-diagonal.

#ifndef SLOTMEM_MODEL_SLOT_SSM_H_
#define SLOTMEM_MODEL_SLOT_SSM_H_

#include <random>
#include <string>
#include <vector>

#include "slotmem/model/config.h"
#include "slotmem/model/layers.h"

namespace slotmem::model {

struct SsmStep {
  Var h;  // K x H
  Var y;  // K x D
};

struct SsmScan {
  std::vector<Var> h;
  std::vector<Var> y;
};

class SlotSsm {
 public:
  SlotSsm() = default;
  SlotSsm(ParameterStore& store, const std::string& prefix, int d_slot,
          int state, std::mt19937_64& rng);

  SsmStep Step(Tape& t, Var s, Var h) const;
  // Sequential reference scan. `h0` may be invalid for a zero start.
  SsmScan Scan(Tape& t, const std::vector<Var>& s, Var h0 = Var()) const;

  int d_slot() const { return d_slot_; }
  int state() const { return state_; }
  Parameter& delta_w() const { return *delta_w_; }
  Parameter& delta_b() const { return *delta_b_; }
  Parameter& a_log() const { return *a_log_; }
  Parameter& b_w() const { return *b_w_; }
  Parameter& gate_w() const { return *gate_w_; }
  Parameter& gate_b() const { return *gate_b_; }
  Parameter& c_w() const { return *c_w_; }

 private:
  Parameter* delta_w_ = nullptr;
  Parameter* delta_b_ = nullptr;
  Parameter* a_log_ = nullptr;
  Parameter* b_w_ = nullptr;
  Parameter* gate_w_ = nullptr;
  Parameter* gate_b_ = nullptr;
  Parameter* c_w_ = nullptr;
  int d_slot_ = 0;
  int state_ = 0;
};

// Window offsets in column-block order: -p..-1 then 1..q.
std::vector<int> WindowOffsets(int past, int future);

// Shared MLP from concat(y_k, s_k) to p + q latents of width D per slot.
// Output is K x ((p + q) * D), block j holding offset WindowOffsets()[j].
class PastMlp {
 public:
  PastMlp() = default;
  PastMlp(ParameterStore& store, const std::string& prefix,
          const ModelConfig& cfg, std::mt19937_64& rng);
  Var operator()(Tape& t, Var y, Var s) const;

  int window() const { return past_ + future_; }

 private:
  Mlp mlp_;
  int d_slot_ = 0;
  int past_ = 0;
  int future_ = 0;
};

// Mean squared error over unmasked (slot, offset) pairs:
//   sum |pred - target|^2 / (pairs * D).
// `targets` matches `pred` (K x P*D) and is treated as a constant; `mask`
// is K x P with 1 for supervised pairs. Throws if nothing is unmasked.
Var WindowReconLoss(Var pred, const Matrix& targets, const Matrix& mask);

}  // namespace slotmem::model

#endif  // SLOTMEM_MODEL_SLOT_SSM_H_
