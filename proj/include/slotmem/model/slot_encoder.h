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

// Frames to object slots: a patch encoder, iterative slot attention with
// cross-frame carryover, and the temporal slot-contrastive objective.

#ifndef SLOTMEM_MODEL_SLOT_ENCODER_H_
#define SLOTMEM_MODEL_SLOT_ENCODER_H_

#include <cstdint>
#include <string>
#include <vector>

#include "slotmem/grid/memgrid.h"
#include "slotmem/model/config.h"
#include "slotmem/model/layers.h"

namespace slotmem::model {

// Non-overlapping patch x patch tiles flattened row-major (y, x, channel),
// intensities scaled to [0, 1]. One row per patch.
Matrix FrameToPatches(const grid::Frame& frame, int patch);
// Per patch: (x, y, 1 - x, 1 - y) of the patch center in [0, 1].
Matrix PatchPositions(int side);

// Strided patch convolution + GELU, plus a learned linear embedding of the
// patch position. Output: num_patches x d_enc.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  FeatureEncoder(ParameterStore& store, const std::string& prefix,
                 const ModelConfig& cfg, std::mt19937_64& rng);
  Var Encode(Tape& t, const Matrix& patches) const;

 private:
  Linear conv_;
  Linear pos_;
  Matrix positions_;
};

struct SlotAttentionOutput {
  Var slots;         // N x d_slot
  Matrix attention;  // N x M, softmax over slots (columns sum to 1)
  Matrix weights;    // N x M, attention renormalised over features
};

// Iterative slot attention: logits q k^T / sqrt(d), softmax across slots
// for every feature, renormalisation across features for every slot,
// weighted mean of values, GRU update. Heads split the feature width.
class SlotAttention {
 public:
  SlotAttention() = default;
  SlotAttention(ParameterStore& store, const std::string& prefix,
                const ModelConfig& cfg, std::mt19937_64& rng);
  SlotAttentionOutput Run(Tape& t, Var features, Var init, int iters) const;

 private:
  LayerNorm norm_inputs_;
  LayerNorm norm_slots_;
  Linear q_, k_, v_;
  GruCell gru_;
  int heads_ = 1;
  int d_enc_ = 0;
};

// Learned Gaussian over slot vectors, shared across slots.
class SlotInitializer {
 public:
  SlotInitializer() = default;
  SlotInitializer(ParameterStore& store, const std::string& prefix, int dim,
                  std::mt19937_64& rng);
  // Reparameterised draw of `n` slots; identical for identical seeds.
  Var Sample(Tape& t, int n, std::uint64_t seed) const;

 private:
  Parameter* mean_ = nullptr;
  Parameter* log_std_ = nullptr;
};

// Returns `prev` when it exists, otherwise a fresh draw.
Var InitSlots(Tape& t, const SlotInitializer& init, const Var* prev, int n,
              std::uint64_t seed);

// -mean over anchors of log(pos / (pos + neg)) where pos and neg are the
// exp(cos / tau) masses selected by the 0/1 masks (rows are anchors).
// Anchors without positives are skipped.
Var InfoNceLoss(Var z, const Matrix& positives, const Matrix& negatives,
                double tau);

// tracks[sequence][time] is a K x D slot set. Positives of (seq, k, t) are
// (seq, k, t + d) with 1 <= |d| <= delta_max; negatives are the other slots
// of the same sequence at any time and everything in other sequences.
Var ContrastiveLoss(const std::vector<std::vector<Var>>& tracks, int delta_max,
                    double tau = 1.0);

}  // namespace slotmem::model

#endif  // SLOTMEM_MODEL_SLOT_ENCODER_H_
