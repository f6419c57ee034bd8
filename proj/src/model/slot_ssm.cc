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

#include "slotmem/model/slot_ssm.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slotmem::model {

using namespace ad;  // NOLINT: op vocabulary

SlotSsm::SlotSsm(ParameterStore& store, const std::string& prefix, int d_slot,
                 int state, std::mt19937_64& rng)
    : d_slot_(d_slot), state_(state) {
  delta_w_ = &store.Create(prefix + ".delta.w", XavierInit(d_slot, state, rng));
  // softplus(-1) ~ 0.31: a moderate initial step size.
  delta_b_ = &store.Create(prefix + ".delta.b", Matrix::Constant(1, state, -1.0));
  Matrix a_log(1, state);
  for (int i = 0; i < state; ++i) {
    a_log(0, i) = std::log(0.5 + 4.5 * i / std::max(1, state - 1));
  }
  a_log_ = &store.Create(prefix + ".a_log", a_log);
  b_w_ = &store.Create(prefix + ".b.w", XavierInit(d_slot, state, rng));
  gate_w_ = &store.Create(prefix + ".gate.w", XavierInit(d_slot, state, rng));
  gate_b_ = &store.Create(prefix + ".gate.b", Matrix::Zero(1, state));
  c_w_ = &store.Create(prefix + ".c.w", XavierInit(state, d_slot, rng));
}

SsmStep SlotSsm::Step(Tape& t, Var s, Var h) const {
  if (s.cols() != d_slot_) {
    throw std::invalid_argument("SlotSsm: slot width " +
                                std::to_string(s.cols()) + " != " +
                                std::to_string(d_slot_));
  }
  if (!s.value().allFinite()) {
    throw std::invalid_argument("SlotSsm: non-finite input");
  }
  if (!h.valid()) h = t.Constant(Matrix::Zero(s.rows(), state_));
  if (h.rows() != s.rows() || h.cols() != state_) {
    throw std::invalid_argument("SlotSsm: hidden state shape mismatch");
  }
  Var delta = Softplus(AddRow(MatMul(s, t.Leaf(*delta_w_)), t.Leaf(*delta_b_)));
  Var abar = Exp(Neg(MulRow(delta, Exp(t.Leaf(*a_log_)))));
  Var drive = MatMul(s, t.Leaf(*b_w_));
  Var one_minus = AddScalar(Neg(abar), 1.0);
  SsmStep out;
  out.h = Add(Mul(abar, h), Mul(one_minus, drive));
  Var gate = Sigmoid(AddRow(MatMul(s, t.Leaf(*gate_w_)), t.Leaf(*gate_b_)));
  out.y = MatMul(Mul(gate, out.h), t.Leaf(*c_w_));
  return out;
}

SsmScan SlotSsm::Scan(Tape& t, const std::vector<Var>& s, Var h0) const {
  if (s.empty()) throw std::invalid_argument("SlotSsm: empty sequence");
  SsmScan out;
  Var h = h0;
  for (const Var& st : s) {
    SsmStep step = Step(t, st, h);
    h = step.h;
    out.h.push_back(step.h);
    out.y.push_back(step.y);
  }
  return out;
}

std::vector<int> WindowOffsets(int past, int future) {
  std::vector<int> offsets;
  for (int d = -past; d <= future; ++d) {
    if (d != 0) offsets.push_back(d);
  }
  return offsets;
}

PastMlp::PastMlp(ParameterStore& store, const std::string& prefix,
                 const ModelConfig& cfg, std::mt19937_64& rng)
    : mlp_(store, prefix, 2 * cfg.d_slot, cfg.mlp_hidden,
           cfg.window() * cfg.d_slot, rng),
      d_slot_(cfg.d_slot),
      past_(cfg.window_past),
      future_(cfg.window_future) {}

Var PastMlp::operator()(Tape& t, Var y, Var s) const {
  if (y.cols() != d_slot_ || s.cols() != d_slot_ || y.rows() != s.rows()) {
    throw std::invalid_argument("PastMlp: dimension mismatch");
  }
  return mlp_(t, ConcatCols({y, s}));
}

Var WindowReconLoss(Var pred, const Matrix& targets, const Matrix& mask) {
  const Eigen::Index k = pred.rows();
  const Eigen::Index p = mask.cols();
  if (targets.rows() != k || targets.cols() != pred.cols() ||
      mask.rows() != k || p == 0 || pred.cols() % p != 0) {
    throw std::invalid_argument("WindowReconLoss: dimension mismatch");
  }
  const Eigen::Index d = pred.cols() / p;
  const double pairs = mask.sum();
  if (pairs <= 0) throw std::invalid_argument("WindowReconLoss: all masked");
  Matrix wide(k, pred.cols());
  for (Eigen::Index j = 0; j < p; ++j) {
    wide.middleCols(j * d, d) = mask.col(j).replicate(1, d);
  }
  Tape& t = *pred.tape();
  Var err = Mul(Square(Sub(pred, t.Constant(targets))), t.Constant(wide));
  return Scale(Sum(err), 1.0 / (pairs * d));
}

}  // namespace slotmem::model
