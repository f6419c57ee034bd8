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

#include "slotmem/model/model.h"

#include <stdexcept>

namespace slotmem::model {

using namespace ad;  // NOLINT: op vocabulary

StepInput MakeStepInput(const ModelConfig& cfg, const grid::Frame& frame,
                        const grid::EnvState& state,
                        const std::vector<int>& object_subgoals,
                        const std::string& task_id) {
  StepInput in;
  in.patches = FrameToPatches(frame, cfg.patch);
  in.object_masks = ObjectPatchMasks(
      frame, static_cast<int>(state.objects.size()), cfg.patch);
  in.object_subgoals = object_subgoals;
  in.task_index = grid::TaskIndex(task_id);
  return in;
}

Model::Model(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.Validate();
  std::mt19937_64 rng(cfg_.seed);
  encoder_ = FeatureEncoder(store_, "encoder.features", cfg_, rng);
  slot_attention_ = SlotAttention(store_, "encoder.slots", cfg_, rng);
  initializer_ = SlotInitializer(store_, "encoder.init", cfg_.d_slot, rng);
  ssm_ = SlotSsm(store_, "ssm.core", cfg_.d_slot, cfg_.ssm_state, rng);
  past_mlp_ = PastMlp(store_, "ssm.past_mlp", cfg_, rng);
  fusion_ = SlotFusion(store_, "head.fusion", cfg_, rng);
  relation_ = RelationEncoder(store_, "head.relation", cfg_, rng);
  decoder_ = ActionDecoder(store_, "head.decoder", cfg_, rng);
  subgoal_table_ = &store_.Create(
      "embeddings.subgoal",
      NormalInit(SubgoalVocabulary::Shipped().size(), cfg_.d_slot, 0.5, rng));
  task_table_ = &store_.Create(
      "embeddings.task",
      NormalInit(static_cast<int>(grid::AllTaskIds().size()), cfg_.d_slot, 0.5,
                 rng));
}

StepOutput Model::Step(Tape& t, const StepInput& in, const Carry& carry,
                       std::uint64_t init_seed) const {
  if (in.task_index < 0 ||
      in.task_index >= static_cast<int>(task_table_->value.rows())) {
    throw std::out_of_range("Model: task index out of range");
  }
  StepOutput out;
  out.features = encoder_.Encode(t, in.patches);
  const int k = cfg_.num_slots;
  const bool fresh = memoryless() || !carry.slots.valid();
  Var init = fresh ? initializer_.Sample(t, k, memoryless() ? cfg_.seed : init_seed)
                   : carry.slots;
  SlotAttentionOutput sa = slot_attention_.Run(
      t, out.features, init, fresh ? cfg_.iters_first : cfg_.iters_carry);
  out.slots = sa.slots;
  out.attention = sa.attention;
  if (out.attention.size() == 0) {
    // Zero refinement iterations: attention of the carried slots is not
    // recomputed, so assignment falls back to uniform maps.
    out.attention = Matrix::Constant(k, in.patches.rows(), 1.0 / k);
  }

  std::vector<int> slot_goal(k, 0);
  if (!memoryless()) {
    SsmStep s = ssm_.Step(t, out.slots, carry.h);
    out.h = s.h;
    out.y = s.y;
    out.window = past_mlp_(t, out.y, out.slots);
    out.assignment = AssignObjectsToSlots(out.attention, in.object_masks);
    slot_goal = SlotSubgoalIndex(in.object_subgoals, out.assignment, k);
  } else {
    out.y = t.Constant(Matrix::Zero(k, cfg_.d_slot));
  }
  out.slot_subgoals = slot_goal;
  Var g = GatherRows(t.Leaf(*subgoal_table_), slot_goal);
  Var d = fusion_(t, out.slots, out.y, g);
  RelationOutput r = relation_(t, d, out.features);
  Var l = GatherRows(t.Leaf(*task_table_), {in.task_index});
  out.decoder_tokens = static_cast<int>(r.tokens.value().rows() +
                                        d.value().rows() + l.value().rows());
  out.log_probs = decoder_(t, r.tokens, d, l);
  return out;
}

void PolicyRunner::Reset(std::uint64_t episode_seed) {
  seed_ = episode_seed;
  started_ = false;
}

Matrix PolicyRunner::Observe(const StepInput& in, StepOutput* detail) {
  Tape t(false);
  Carry carry;
  if (started_) {
    carry.slots = t.Constant(slots_);
    carry.h = t.Constant(h_);
  }
  StepOutput out = model_->Step(t, in, carry, seed_);
  slots_ = out.slots.value();
  if (out.h.valid()) h_ = out.h.value();
  started_ = true;
  Matrix lp = out.log_probs.value();
  if (detail) {
    detail->attention = out.attention;
    detail->assignment = out.assignment;
    detail->slot_subgoals = out.slot_subgoals;
    detail->decoder_tokens = out.decoder_tokens;
  }
  return lp;
}

}  // namespace slotmem::model
