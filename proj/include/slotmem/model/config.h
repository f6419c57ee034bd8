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

#ifndef SLOTMEM_MODEL_CONFIG_H_
#define SLOTMEM_MODEL_CONFIG_H_

#include <cstdint>
#include <string>

namespace slotmem::model {

enum class Variant { kFull, kMemoryless };

struct ModelConfig {
  Variant variant = Variant::kFull;
  int image_size = 64;
  int patch = 8;
  int d_enc = 64;
  int num_slots = 16;  // K
  int d_slot = 64;
  int slot_heads = 1;
  int iters_first = 3;
  int iters_carry = 1;
  int mlp_hidden = 128;
  int ssm_state = 64;  // H per slot
  int window_past = 16;    // p
  int window_future = 16;  // q
  int num_relation = 16;   // L
  int decoder_layers = 2;
  int attn_heads = 1;
  std::uint64_t seed = 0;

  int num_patches() const {
    const int side = image_size / patch;
    return side * side;
  }
  int patch_dim() const { return patch * patch * 3; }
  int window() const { return window_past + window_future; }
  // Tokens seen by the action decoder: relation, slot and task tokens.
  int decoder_tokens() const { return num_relation + num_slots + 1; }

  void Validate() const;
  std::string ToJson() const;
  static ModelConfig FromJson(const std::string& text);
};

const char* VariantName(Variant v);
Variant ParseVariant(const std::string& name);

}  // namespace slotmem::model

#endif  // SLOTMEM_MODEL_CONFIG_H_
