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

// The complete policy: frame encoder, slot attention with carryover, slot
// SSM, windowed predictor and action head. The memoryless variant shares the
// head but sees only freshly initialised slots of the current frame.

#ifndef SLOTMEM_MODEL_MODEL_H_
#define SLOTMEM_MODEL_MODEL_H_

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "slotmem/grid/memgrid.h"
#include "slotmem/model/config.h"
#include "slotmem/model/layers.h"
#include "slotmem/model/policy_head.h"
#include "slotmem/model/slot_encoder.h"
#include "slotmem/model/slot_ssm.h"

namespace slotmem::model {

struct StepInput {
  Matrix patches;        // FrameToPatches of the observation
  Matrix object_masks;   // ObjectPatchMasks, one row per object
  std::vector<int> object_subgoals;  // ObjectSubgoals, one per object
  int task_index = 0;    // grid::TaskIndex
};

StepInput MakeStepInput(const ModelConfig& cfg, const grid::Frame& frame,
                        const grid::EnvState& state,
                        const std::vector<int>& object_subgoals,
                        const std::string& task_id);

// Recurrent carry as tape variables. Invalid vars mean "episode start".
struct Carry {
  Var slots;
  Var h;
};

struct StepOutput {
  Var features;     // M x D_enc
  Var slots;        // K x D_slot
  Matrix attention;  // K x M, softmax over slots
  Var h;            // K x H (full model only)
  Var y;            // K x D_slot, predicted next slots (zeros if memoryless)
  Var window;       // K x P*D_slot (full model only)
  Var log_probs;    // 1 x kNumActions
  std::vector<int> assignment;     // object -> slot
  std::vector<int> slot_subgoals;  // per slot vocabulary index
  int decoder_tokens = 0;          // rows of the decoder's input sequence
};

class Model {
 public:
  explicit Model(const ModelConfig& cfg);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  // `init_seed` seeds the slot draw when the carry is empty.
  StepOutput Step(Tape& t, const StepInput& in, const Carry& carry,
                  std::uint64_t init_seed) const;

  const ModelConfig& config() const { return cfg_; }
  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }
  bool memoryless() const { return cfg_.variant == Variant::kMemoryless; }

  const FeatureEncoder& encoder() const { return encoder_; }
  const SlotAttention& slot_attention() const { return slot_attention_; }
  const SlotSsm& ssm() const { return ssm_; }

 private:
  ModelConfig cfg_;
  ParameterStore store_;
  FeatureEncoder encoder_;
  SlotAttention slot_attention_;
  SlotInitializer initializer_;
  SlotSsm ssm_;
  PastMlp past_mlp_;
  SlotFusion fusion_;
  RelationEncoder relation_;
  ActionDecoder decoder_;
  Parameter* subgoal_table_ = nullptr;
  Parameter* task_table_ = nullptr;
};

// Inference-time wrapper that owns the carry between frames.
class PolicyRunner {
 public:
  explicit PolicyRunner(const Model& model) : model_(&model) {}
  void Reset(std::uint64_t episode_seed);
  // Log-probabilities for the current observation; advances the carry.
  Matrix Observe(const StepInput& in, StepOutput* detail = nullptr);

  const Matrix& slots() const { return slots_; }
  const Matrix& hidden() const { return h_; }

 private:
  const Model* model_;
  std::uint64_t seed_ = 0;
  bool started_ = false;
  Matrix slots_;
  Matrix h_;
};

}  // namespace slotmem::model

#endif  // SLOTMEM_MODEL_MODEL_H_
