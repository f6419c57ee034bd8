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

// Action head: subgoal conditioning, per-slot fusion, relation tokens and
// the attention decoder over [relation; fused slots; task] tokens.

#ifndef SLOTMEM_MODEL_POLICY_HEAD_H_
#define SLOTMEM_MODEL_POLICY_HEAD_H_

#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "slotmem/goal/goal_dsl.h"
#include "slotmem/grid/env_state.h"
#include "slotmem/grid/memgrid.h"
#include "slotmem/model/config.h"
#include "slotmem/model/layers.h"

namespace slotmem::model {

// Symbolic subgoal keys (predicate, subject, target) of every shipped goal.
// Index 0 is reserved for "no pending subgoal".
class SubgoalVocabulary {
 public:
  // Built from all registered tasks.
  static const SubgoalVocabulary& Shipped();
  explicit SubgoalVocabulary(const std::vector<goal::GoalExpr>& goals);

  int size() const { return static_cast<int>(keys_.size()) + 1; }
  // 0 when the predicate is unknown.
  int Lookup(const goal::Predicate& p) const;

 private:
  std::map<std::tuple<int, std::string, std::string>, int> keys_;
};

// Per object: vocabulary index of the first pending subgoal (alive branches
// in order) that mentions the object, or 0. "<basket>_contain_region" names
// count as mentioning the basket.
std::vector<int> ObjectSubgoals(const SubgoalVocabulary& vocab,
                                const goal::GoalStructure& structure,
                                const goal::EvalProgress& progress,
                                const grid::EnvState& state);

// Fraction of every patch covered by each instance label: one row per
// object (label 1 + i), one column per patch.
Matrix ObjectPatchMasks(const grid::Frame& frame, int num_objects, int patch);

// Greedy object-to-slot assignment by attention/mask overlap. Objects claim
// their best free slot in index order; objects without visible pixels stay
// unassigned (-1).
std::vector<int> AssignObjectsToSlots(const Matrix& attention,
                                      const Matrix& object_masks);

// Per slot vocabulary index given the assignment (0 when unassigned).
std::vector<int> SlotSubgoalIndex(const std::vector<int>& object_subgoals,
                                  const std::vector<int>& assignment,
                                  int num_slots);

// d_k = MLP(concat(s_k, y_k, g_k)), shared across slots.
class SlotFusion {
 public:
  SlotFusion() = default;
  SlotFusion(ParameterStore& store, const std::string& prefix,
             const ModelConfig& cfg, std::mt19937_64& rng);
  Var operator()(Tape& t, Var s, Var y, Var g) const;

 private:
  Mlp mlp_;
  int d_slot_ = 0;
};

struct RelationOutput {
  Var tokens;          // L x D
  Matrix slot_attn;    // L x K
  Matrix feature_attn;  // L x M
};

// L learned queries cross-attend to the fused slots, then to the features,
// each stage followed by a residual layer norm.
class RelationEncoder {
 public:
  RelationEncoder() = default;
  RelationEncoder(ParameterStore& store, const std::string& prefix,
                  const ModelConfig& cfg, std::mt19937_64& rng);
  RelationOutput operator()(Tape& t, Var d, Var features) const;

 private:
  Parameter* queries_ = nullptr;
  CrossAttention to_slots_;
  CrossAttention to_features_;
  LayerNorm norm_slots_;
  LayerNorm norm_features_;
};

// Self-attention decoder over [r; d; l] with per-group type embeddings and
// no positional encodings. Returns 1 x kNumActions log-probabilities read
// out at the task token.
class ActionDecoder {
 public:
  ActionDecoder() = default;
  ActionDecoder(ParameterStore& store, const std::string& prefix,
                const ModelConfig& cfg, std::mt19937_64& rng);
  Var operator()(Tape& t, Var r, Var d, Var l) const;

 private:
  struct Block {
    CrossAttention attn;
    LayerNorm norm_attn;
    Mlp mlp;
    LayerNorm norm_mlp;
  };
  Parameter* type_ = nullptr;  // 3 x D: relation, slot, task
  std::vector<Block> blocks_;
  Linear out_;
};

}  // namespace slotmem::model

#endif  // SLOTMEM_MODEL_POLICY_HEAD_H_
