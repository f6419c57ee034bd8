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

#include "slotmem/model/policy_head.h"

#include <algorithm>
#include <stdexcept>

namespace slotmem::model {

using namespace ad;  // NOLINT: op vocabulary

namespace {

std::tuple<int, std::string, std::string> Key(const goal::Predicate& p) {
  return {static_cast<int>(p.name), p.subject, p.target};
}

// Object index named by a goal identifier, resolving region aliases.
int ResolveObject(const grid::EnvState& s, const std::string& id) {
  int o = s.Find(id);
  if (o >= 0) return o;
  const std::string suffix = "_contain_region";
  if (id.size() > suffix.size() &&
      id.compare(id.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return s.Find(id.substr(0, id.size() - suffix.size()));
  }
  return -1;
}

}  // namespace

const SubgoalVocabulary& SubgoalVocabulary::Shipped() {
  static const SubgoalVocabulary* vocab = [] {
    std::vector<goal::GoalExpr> goals;
    for (const std::string& id : grid::AllTaskIds()) {
      goals.push_back(grid::GetTask(id).goal);
    }
    return new SubgoalVocabulary(goals);
  }();
  return *vocab;
}

SubgoalVocabulary::SubgoalVocabulary(const std::vector<goal::GoalExpr>& goals) {
  for (const goal::GoalExpr& g : goals) {
    for (const goal::Predicate& p : goal::Flatten(g).predicates) {
      keys_.emplace(Key(p), 0);
    }
  }
  int next = 1;
  for (auto& [key, index] : keys_) index = next++;
}

int SubgoalVocabulary::Lookup(const goal::Predicate& p) const {
  auto it = keys_.find(Key(p));
  return it == keys_.end() ? 0 : it->second;
}

std::vector<int> ObjectSubgoals(const SubgoalVocabulary& vocab,
                                const goal::GoalStructure& structure,
                                const goal::EvalProgress& progress,
                                const grid::EnvState& state) {
  std::vector<int> out(state.objects.size(), 0);
  for (const auto& [branch, subgoal] :
       goal::PendingSubgoals(progress, structure)) {
    for (int pi : subgoal) {
      const goal::Predicate& p = structure.predicates[pi];
      for (const std::string* id : {&p.subject, &p.target}) {
        if (id->empty()) continue;
        const int o = ResolveObject(state, *id);
        if (o >= 0 && out[o] == 0) out[o] = vocab.Lookup(p);
      }
    }
  }
  return out;
}

Matrix ObjectPatchMasks(const grid::Frame& frame, int num_objects, int patch) {
  const int cols = frame.width / patch;
  const int rows = frame.height / patch;
  Matrix m = Matrix::Zero(num_objects, rows * cols);
  const double area = patch * patch;
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const int label = frame.labels[y * frame.width + x];
      if (label >= 1 && label <= num_objects) {
        m(label - 1, (y / patch) * cols + x / patch) += 1.0 / area;
      }
    }
  }
  return m;
}

std::vector<int> AssignObjectsToSlots(const Matrix& attention,
                                      const Matrix& object_masks) {
  if (attention.cols() != object_masks.cols()) {
    throw std::invalid_argument("AssignObjectsToSlots: patch count mismatch");
  }
  const Matrix overlap = object_masks * attention.transpose();  // O x K
  std::vector<bool> taken(attention.rows(), false);
  std::vector<int> out(object_masks.rows(), -1);
  for (Eigen::Index o = 0; o < object_masks.rows(); ++o) {
    if (object_masks.row(o).sum() <= 0) continue;
    int best = -1;
    for (Eigen::Index k = 0; k < attention.rows(); ++k) {
      if (taken[k]) continue;
      if (best < 0 || overlap(o, k) > overlap(o, best)) best = static_cast<int>(k);
    }
    if (best >= 0) {
      taken[best] = true;
      out[o] = best;
    }
  }
  return out;
}

std::vector<int> SlotSubgoalIndex(const std::vector<int>& object_subgoals,
                                  const std::vector<int>& assignment,
                                  int num_slots) {
  std::vector<int> out(num_slots, 0);
  for (std::size_t o = 0; o < assignment.size() && o < object_subgoals.size();
       ++o) {
    if (assignment[o] >= 0) out[assignment[o]] = object_subgoals[o];
  }
  return out;
}

SlotFusion::SlotFusion(ParameterStore& store, const std::string& prefix,
                       const ModelConfig& cfg, std::mt19937_64& rng)
    : mlp_(store, prefix, 3 * cfg.d_slot, cfg.mlp_hidden, cfg.d_slot, rng),
      d_slot_(cfg.d_slot) {}

Var SlotFusion::operator()(Tape& t, Var s, Var y, Var g) const {
  for (const Var* v : {&s, &y, &g}) {
    if (v->cols() != d_slot_ || v->rows() != s.rows()) {
      throw std::invalid_argument("SlotFusion: dimension mismatch");
    }
  }
  return mlp_(t, ConcatCols({s, y, g}));
}

RelationEncoder::RelationEncoder(ParameterStore& store,
                                 const std::string& prefix,
                                 const ModelConfig& cfg, std::mt19937_64& rng)
    : to_slots_(store, prefix + ".to_slots", cfg.d_slot, cfg.d_slot,
                cfg.attn_heads, rng),
      to_features_(store, prefix + ".to_features", cfg.d_slot, cfg.d_enc,
                   cfg.attn_heads, rng),
      norm_slots_(store, prefix + ".norm_slots", cfg.d_slot),
      norm_features_(store, prefix + ".norm_features", cfg.d_slot) {
  queries_ = &store.Create(prefix + ".queries",
                           NormalInit(cfg.num_relation, cfg.d_slot, 0.5, rng));
}

RelationOutput RelationEncoder::operator()(Tape& t, Var d, Var features) const {
  RelationOutput out;
  Var q = t.Leaf(*queries_);
  AttentionResult a = to_slots_(t, q, d);
  Var r = norm_slots_(t, Add(q, a.out));
  AttentionResult b = to_features_(t, r, features);
  out.tokens = norm_features_(t, Add(r, b.out));
  out.slot_attn = a.weights;
  out.feature_attn = b.weights;
  return out;
}

ActionDecoder::ActionDecoder(ParameterStore& store, const std::string& prefix,
                             const ModelConfig& cfg, std::mt19937_64& rng)
    : out_(store, prefix + ".out", cfg.d_slot, grid::kNumActions, rng) {
  type_ = &store.Create(prefix + ".type", NormalInit(3, cfg.d_slot, 0.5, rng));
  for (int i = 0; i < cfg.decoder_layers; ++i) {
    const std::string p = prefix + ".block" + std::to_string(i);
    blocks_.push_back(
        Block{CrossAttention(store, p + ".attn", cfg.d_slot, cfg.d_slot,
                             cfg.attn_heads, rng),
              LayerNorm(store, p + ".norm_attn", cfg.d_slot),
              Mlp(store, p + ".mlp", cfg.d_slot, cfg.mlp_hidden, cfg.d_slot,
                  rng),
              LayerNorm(store, p + ".norm_mlp", cfg.d_slot)});
  }
}

Var ActionDecoder::operator()(Tape& t, Var r, Var d, Var l) const {
  if (l.rows() != 1 || r.cols() != d.cols() || l.cols() != d.cols()) {
    throw std::invalid_argument("ActionDecoder: token shape mismatch");
  }
  Var type = t.Leaf(*type_);
  Var x = ConcatRows({AddRow(r, SliceRows(type, 0, 1)),
                      AddRow(d, SliceRows(type, 1, 1)),
                      Add(l, SliceRows(type, 2, 1))});
  for (const Block& b : blocks_) {
    x = b.norm_attn(t, Add(x, b.attn(t, x, x).out));
    x = b.norm_mlp(t, Add(x, b.mlp(t, x)));
  }
  Var task = SliceRows(x, static_cast<int>(x.rows()) - 1, 1);
  return LogSoftmaxRows(out_(t, task));
}

}  // namespace slotmem::model
