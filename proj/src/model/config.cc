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

#include "slotmem/model/config.h"

#include <stdexcept>

#include <json.hpp>

namespace slotmem::model {

const char* VariantName(Variant v) {
  return v == Variant::kFull ? "full" : "memoryless";
}

Variant ParseVariant(const std::string& name) {
  if (name == "full") return Variant::kFull;
  if (name == "memoryless") return Variant::kMemoryless;
  throw std::invalid_argument("unknown model variant '" + name + "'");
}

void ModelConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("model config: ") + what);
  };
  require(patch > 0 && image_size % patch == 0, "image_size % patch != 0");
  require(d_enc > 0 && d_slot > 0 && num_slots > 0, "non-positive width");
  require(slot_heads > 0 && d_enc % slot_heads == 0, "d_enc % slot_heads != 0");
  require(attn_heads > 0 && d_slot % attn_heads == 0, "d_slot % attn_heads != 0");
  require(iters_first >= 1 && iters_carry >= 0, "bad slot iterations");
  require(ssm_state > 0 && mlp_hidden > 0, "non-positive hidden size");
  require(window_past >= 0 && window_future >= 0 && window() > 0, "bad window");
  require(num_relation > 0 && decoder_layers > 0, "bad head size");
}

std::string ModelConfig::ToJson() const {
  nlohmann::json j;
  j["variant"] = VariantName(variant);
  j["image_size"] = image_size;
  j["patch"] = patch;
  j["d_enc"] = d_enc;
  j["num_slots"] = num_slots;
  j["d_slot"] = d_slot;
  j["slot_heads"] = slot_heads;
  j["iters_first"] = iters_first;
  j["iters_carry"] = iters_carry;
  j["mlp_hidden"] = mlp_hidden;
  j["ssm_state"] = ssm_state;
  j["window_past"] = window_past;
  j["window_future"] = window_future;
  j["num_relation"] = num_relation;
  j["decoder_layers"] = decoder_layers;
  j["attn_heads"] = attn_heads;
  j["seed"] = seed;
  return j.dump();
}

ModelConfig ModelConfig::FromJson(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ModelConfig c;
  c.variant = ParseVariant(j.at("variant").get<std::string>());
  c.image_size = j.at("image_size").get<int>();
  c.patch = j.at("patch").get<int>();
  c.d_enc = j.at("d_enc").get<int>();
  c.num_slots = j.at("num_slots").get<int>();
  c.d_slot = j.at("d_slot").get<int>();
  c.slot_heads = j.at("slot_heads").get<int>();
  c.iters_first = j.at("iters_first").get<int>();
  c.iters_carry = j.at("iters_carry").get<int>();
  c.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.ssm_state = j.at("ssm_state").get<int>();
  c.window_past = j.at("window_past").get<int>();
  c.window_future = j.at("window_future").get<int>();
  c.num_relation = j.at("num_relation").get<int>();
  c.decoder_layers = j.at("decoder_layers").get<int>();
  c.attn_heads = j.at("attn_heads").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.Validate();
  return c;
}

}  // namespace slotmem::model
