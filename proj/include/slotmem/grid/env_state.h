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

#ifndef SLOTMEM_GRID_ENV_STATE_H_
#define SLOTMEM_GRID_ENV_STATE_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace slotmem::grid {

enum class ObjectClass { kBowl, kBottle, kCheese, kPlate, kBasket, kRegion };

inline const char* ClassName(ObjectClass c) {
  switch (c) {
    case ObjectClass::kBowl: return "bowl";
    case ObjectClass::kBottle: return "bottle";
    case ObjectClass::kCheese: return "cheese";
    case ObjectClass::kPlate: return "plate";
    case ObjectClass::kBasket: return "basket";
    case ObjectClass::kRegion: return "region";
  }
  return "?";
}

// Items rest on surfaces; baskets are both pickable and surfaces.
inline bool IsPickable(ObjectClass c) {
  return c == ObjectClass::kBowl || c == ObjectClass::kBottle ||
         c == ObjectClass::kCheese || c == ObjectClass::kBasket;
}
inline bool IsSurface(ObjectClass c) {
  return c == ObjectClass::kPlate || c == ObjectClass::kBasket;
}
inline bool IsItem(ObjectClass c) {
  return c == ObjectClass::kBowl || c == ObjectClass::kBottle ||
         c == ObjectClass::kCheese;
}

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

inline int Manhattan(Cell a, Cell b) {
  return (a.row > b.row ? a.row - b.row : b.row - a.row) +
         (a.col > b.col ? a.col - b.col : b.col - a.col);
}

struct ObjectState {
  std::string id;
  ObjectClass cls = ObjectClass::kBowl;
  Cell cell;
  int contained_in = -1;  // index of the containing basket, or -1
};

// Full MemGrid world. Invariants: at most one held object; contained
// objects share their container's cell; no two surfaces share a cell.
struct EnvState {
  int grid_size = 8;
  Cell gripper;
  int held = -1;  // index into `objects`, or -1
  std::vector<ObjectState> objects;
  std::uint64_t rng_seed = 0;

  int Find(std::string_view id) const {
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (objects[i].id == id) return static_cast<int>(i);
    }
    return -1;
  }

  friend bool operator==(const EnvState& a, const EnvState& b) {
    if (a.grid_size != b.grid_size || !(a.gripper == b.gripper) ||
        a.held != b.held || a.objects.size() != b.objects.size() ||
        a.rng_seed != b.rng_seed) {
      return false;
    }
    for (std::size_t i = 0; i < a.objects.size(); ++i) {
      const ObjectState& x = a.objects[i];
      const ObjectState& y = b.objects[i];
      if (x.id != y.id || x.cls != y.cls || !(x.cell == y.cell) ||
          x.contained_in != y.contained_in) {
        return false;
      }
    }
    return true;
  }
};

}  // namespace slotmem::grid

#endif  // SLOTMEM_GRID_ENV_STATE_H_
