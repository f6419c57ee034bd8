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

#include "slotmem/grid/memgrid.h"

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "goal_texts.h"

namespace slotmem::grid {
namespace {

using Rgb = std::array<std::uint8_t, 3>;

constexpr Rgb kTable = {214, 200, 172};
constexpr Rgb kRegionFill = {150, 190, 220};
constexpr Rgb kRegionEdge = {110, 150, 190};
constexpr Rgb kPlateFill = {236, 236, 236};
constexpr Rgb kPlateRim = {188, 188, 188};
constexpr Rgb kBasketEdge = {120, 78, 38};
constexpr Rgb kBasketWeave = {176, 128, 78};
constexpr Rgb kBowlBody = {34, 34, 34};
constexpr Rgb kBowlRim = {82, 82, 82};
constexpr Rgb kBottleGlass = {40, 118, 62};
constexpr Rgb kBottleCap = {198, 178, 64};
constexpr Rgb kCheese = {248, 220, 92};
constexpr Rgb kCheeseRind = {214, 170, 40};
constexpr Rgb kGripperOpen = {222, 40, 40};
constexpr Rgb kGripperClosed = {40, 72, 222};

constexpr int kMaxLayoutRetries = 1000;

// 8x8 sprite painter: returns false where the sprite is transparent.
bool SpritePixel(ObjectClass cls, int y, int x, Rgb& out) {
  const double cy = y - 3.5;
  const double cx = x - 3.5;
  const double r2 = cy * cy + cx * cx;
  switch (cls) {
    case ObjectClass::kRegion:
      out = (y == 0 || y == 7 || x == 0 || x == 7) ? kRegionEdge : kRegionFill;
      return true;
    case ObjectClass::kPlate:
      if (r2 > 3.9 * 3.9) return false;
      out = r2 > 2.9 * 2.9 ? kPlateRim : kPlateFill;
      return true;
    case ObjectClass::kBasket:
      if (y == 0 || y == 7 || x == 0 || x == 7) {
        out = kBasketEdge;
      } else {
        out = ((x + y) % 2 == 0) ? kBasketWeave : kBasketEdge;
      }
      return true;
    case ObjectClass::kBowl:
      if (r2 > 2.6 * 2.6) return false;
      out = r2 > 1.6 * 1.6 ? kBowlRim : kBowlBody;
      return true;
    case ObjectClass::kBottle:
      if (x < 3 || x > 4 || y < 1 || y > 6) return false;
      out = y <= 1 ? kBottleCap : kBottleGlass;
      return true;
    case ObjectClass::kCheese:
      if (y < 2 || y > 5 || x < 1 || x > 6 || x - 1 < 5 - y) return false;
      out = y == 5 ? kCheeseRind : kCheese;
      return true;
  }
  return false;
}

void Paint(Frame& f, Cell cell, ObjectClass cls, std::uint8_t label) {
  for (int y = 0; y < kCellPixels; ++y) {
    for (int x = 0; x < kCellPixels; ++x) {
      Rgb c;
      if (!SpritePixel(cls, y, x, c)) continue;
      const int py = cell.row * kCellPixels + y;
      const int px = cell.col * kCellPixels + x;
      const int idx = py * f.width + px;
      f.rgb[3 * idx] = c[0];
      f.rgb[3 * idx + 1] = c[1];
      f.rgb[3 * idx + 2] = c[2];
      f.labels[idx] = label;
    }
  }
}

Cell Clamp(Cell c, int n) {
  c.row = std::clamp(c.row, 0, n - 1);
  c.col = std::clamp(c.col, 0, n - 1);
  return c;
}

// Index of the basket, plate or free item at `c`, skipping held objects.
int SurfaceAt(const EnvState& s, Cell c) {
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const ObjectState& o = s.objects[i];
    if (static_cast<int>(i) != s.held && IsSurface(o.cls) && o.cell == c) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

int FreeItemAt(const EnvState& s, Cell c) {
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const ObjectState& o = s.objects[i];
    if (static_cast<int>(i) != s.held && IsItem(o.cls) && o.contained_in < 0 &&
        o.cell == c) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

class LayoutSampler {
 public:
  LayoutSampler(std::uint64_t seed, int task_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(task_index)};
    rng_.seed(seq);
  }

  int Uniform(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }

  Cell AnyCell() { return {Uniform(kGridSize), Uniform(kGridSize)}; }

  // Draws a cell not in `used`, and records it.
  Cell FreeCell(std::vector<Cell>& used) {
    for (int attempt = 0; attempt < kMaxLayoutRetries; ++attempt) {
      Cell c = AnyCell();
      if (std::find(used.begin(), used.end(), c) == used.end()) {
        used.push_back(c);
        return c;
      }
    }
    throw LayoutError("could not place objects without overlap");
  }

 private:
  std::mt19937_64 rng_;
};

ObjectState MakeObject(std::string id, ObjectClass cls, Cell cell) {
  ObjectState o;
  o.id = std::move(id);
  o.cls = cls;
  o.cell = cell;
  return o;
}

struct TaskDef {
  const char* id;
  std::vector<std::string> dims;
  const char* instruction;
  Layout layout;
  const char* item_id;
  ObjectClass item_class;
};

std::vector<TaskDef> TaskDefs() {
  const char* bowl = "akita_black_bowl_1";
  const char* bottle = "wine_bottle_1";
  return {
      {"T1", {"OM"}, "pick up the bowl and place it back on the plate",
       Layout::kItemAndPlate, bowl, ObjectClass::kBowl},
      {"T2", {"OM"}, "lift the bottle and put it down on the plate",
       Layout::kItemAndPlate, bottle, ObjectClass::kBottle},
      {"T3", {"OM", "OS"},
       "lift the bowl and place it back on the plate 3 times",
       Layout::kItemAndPlate, bowl, ObjectClass::kBowl},
      {"T4", {"OM", "OS"},
       "pick up the bottle and put it down on the plate 3 times",
       Layout::kItemAndPlate, bottle, ObjectClass::kBottle},
      {"T5", {"OM", "OS"},
       "lift the bowl and place it back on the plate 5 times",
       Layout::kItemAndPlate, bowl, ObjectClass::kBowl},
      {"T6", {"OM", "OS"}, "pick up the bowl and put it on the plate 7 times",
       Layout::kItemAndPlate, bowl, ObjectClass::kBowl},
      {"T7", {"OM", "OR"},
       "swap 2 bowls on their plates using the empty plate", Layout::kSwapTwo,
       "", ObjectClass::kBowl},
      {"T8", {"OM", "OR"},
       "swap 3 bowls on their plates using the empty plate",
       Layout::kSwapThree, "", ObjectClass::kBowl},
      {"T9", {"OM", "OO"},
       "put the cream cheese in the nearest basket and place that basket in "
       "the center",
       Layout::kBaskets, "", ObjectClass::kCheese},
      {"T10", {"OM", "OO"},
       "put the cream cheese in the nearest basket and place the empty basket "
       "in the center",
       Layout::kBaskets, "", ObjectClass::kCheese},
  };
}

std::map<std::string, TaskSpec> BuildRegistry() {
  std::map<std::string, TaskSpec> out;
  const auto& texts = ShippedGoalTexts();
  for (const TaskDef& d : TaskDefs()) {
    for (bool lifted : {false, true}) {
      if (lifted && d.layout != Layout::kItemAndPlate) continue;
      TaskSpec t;
      t.id = std::string(d.id) + (lifted ? "_lifted" : "");
      t.dimensions = d.dims;
      t.instruction = d.instruction;
      t.layout = d.layout;
      t.item_id = d.item_id;
      t.item_class = d.item_class;
      auto it = texts.find(t.id);
      if (it == texts.end()) throw std::logic_error("missing goal for " + t.id);
      t.goal_text = it->second;
      t.goal = goal::ParseGoal(t.goal_text);
      out[t.id] = std::move(t);
    }
  }
  return out;
}

const std::map<std::string, TaskSpec>& Registry() {
  static const auto* registry = new std::map<std::string, TaskSpec>(BuildRegistry());
  return *registry;
}

int ResolveTarget(const EnvState& s, const std::string& id) {
  int idx = s.Find(id);
  if (idx >= 0) return idx;
  static constexpr std::string_view kSuffix = "_contain_region";
  if (id.size() > kSuffix.size()) {
    idx = s.Find(std::string_view(id).substr(0, id.size() - kSuffix.size()));
  }
  return idx;
}

}  // namespace

const char* ActionName(Action a) {
  switch (a) {
    case Action::kMoveN: return "MoveN";
    case Action::kMoveS: return "MoveS";
    case Action::kMoveE: return "MoveE";
    case Action::kMoveW: return "MoveW";
    case Action::kPick: return "Pick";
    case Action::kPlace: return "Place";
    case Action::kNoOp: return "NoOp";
  }
  return "?";
}

const std::vector<std::string>& TaskIds() {
  static const auto* ids = new std::vector<std::string>{
      "T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", "T9", "T10"};
  return *ids;
}

const std::vector<std::string>& AllTaskIds() {
  static const auto* ids = [] {
    auto* v = new std::vector<std::string>(TaskIds());
    for (int i = 1; i <= 6; ++i) v->push_back("T" + std::to_string(i) + "_lifted");
    return v;
  }();
  return *ids;
}

const TaskSpec& GetTask(const std::string& id) {
  const auto& reg = Registry();
  auto it = reg.find(id);
  if (it == reg.end()) throw std::invalid_argument("unknown task '" + id + "'");
  return it->second;
}

int TaskIndex(const std::string& id) {
  const auto& ids = AllTaskIds();
  auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw std::invalid_argument("unknown task '" + id + "'");
  return static_cast<int>(it - ids.begin());
}

EnvState Reset(const TaskSpec& task, std::uint64_t seed) {
  LayoutSampler rng(seed, TaskIndex(task.id));
  EnvState s;
  s.grid_size = kGridSize;
  s.rng_seed = seed;
  std::vector<Cell> used;
  switch (task.layout) {
    case Layout::kItemAndPlate: {
      Cell plate = rng.FreeCell(used);
      Cell item = rng.FreeCell(used);
      s.objects.push_back(MakeObject(task.item_id, task.item_class, item));
      s.objects.push_back(MakeObject("plate_1", ObjectClass::kPlate, plate));
      break;
    }
    case Layout::kSwapTwo:
    case Layout::kSwapThree: {
      const int bowls = task.layout == Layout::kSwapTwo ? 2 : 3;
      std::vector<Cell> plates;
      for (int i = 0; i <= bowls; ++i) plates.push_back(rng.FreeCell(used));
      for (int i = 0; i < bowls; ++i) {
        s.objects.push_back(MakeObject("akita_black_bowl_" + std::to_string(i + 1),
                                       ObjectClass::kBowl, plates[i]));
      }
      for (int i = 0; i <= bowls; ++i) {
        s.objects.push_back(MakeObject("plate_" + std::to_string(i + 1),
                                       ObjectClass::kPlate, plates[i]));
      }
      break;
    }
    case Layout::kBaskets: {
      Cell region{3 + rng.Uniform(2), 3 + rng.Uniform(2)};
      Cell cheese, b1, b2;
      bool ok = false;
      for (int attempt = 0; attempt < kMaxLayoutRetries && !ok; ++attempt) {
        used.assign(1, region);
        cheese = rng.FreeCell(used);
        b1 = rng.FreeCell(used);
        b2 = rng.FreeCell(used);
        // The nearest basket must be unambiguous.
        ok = Manhattan(cheese, b1) != Manhattan(cheese, b2);
      }
      if (!ok) throw LayoutError("could not separate basket distances");
      s.objects.push_back(MakeObject("cream_cheese_1", ObjectClass::kCheese, cheese));
      s.objects.push_back(MakeObject("basket_1", ObjectClass::kBasket, b1));
      s.objects.push_back(MakeObject("basket_2", ObjectClass::kBasket, b2));
      s.objects.push_back(
          MakeObject("kitchen_table_the_center", ObjectClass::kRegion, region));
      break;
    }
  }
  s.gripper = rng.AnyCell();
  return s;
}

StepResult Step(const EnvState& s, Action a) {
  StepResult r{s, false};
  EnvState& n = r.state;
  auto move = [&](int dr, int dc) {
    n.gripper = Clamp({n.gripper.row + dr, n.gripper.col + dc}, n.grid_size);
    if (n.held < 0) return;
    n.objects[n.held].cell = n.gripper;
    for (ObjectState& o : n.objects) {
      if (o.contained_in == n.held) o.cell = n.gripper;
    }
  };
  switch (a) {
    case Action::kMoveN: move(-1, 0); break;
    case Action::kMoveS: move(1, 0); break;
    case Action::kMoveE: move(0, 1); break;
    case Action::kMoveW: move(0, -1); break;
    case Action::kNoOp: break;
    case Action::kPick: {
      if (n.held >= 0) {
        r.invalid = true;
        break;
      }
      // A free item sits above any surface in its cell.
      int target = FreeItemAt(n, n.gripper);
      if (target < 0) {
        int surface = SurfaceAt(n, n.gripper);
        if (surface >= 0 && IsPickable(n.objects[surface].cls)) target = surface;
      }
      if (target < 0) {
        r.invalid = true;
        break;
      }
      n.held = target;
      break;
    }
    case Action::kPlace: {
      if (n.held < 0) {
        r.invalid = true;
        break;
      }
      ObjectState& h = n.objects[n.held];
      const int surface = SurfaceAt(n, n.gripper);
      const int item = FreeItemAt(n, n.gripper);
      if (IsItem(h.cls)) {
        if (surface >= 0 && n.objects[surface].cls == ObjectClass::kBasket) {
          h.contained_in = surface;
        } else if (item >= 0) {
          r.invalid = true;
          break;
        }
      } else if (surface >= 0 || item >= 0) {
        r.invalid = true;
        break;
      }
      h.cell = n.gripper;
      n.held = -1;
      break;
    }
  }
  return r;
}

Frame Render(const EnvState& s) {
  Frame f;
  f.rgb.resize(static_cast<std::size_t>(f.height) * f.width * 3);
  f.labels.assign(static_cast<std::size_t>(f.height) * f.width, 0);
  for (std::size_t i = 0; i < f.labels.size(); ++i) {
    f.rgb[3 * i] = kTable[0];
    f.rgb[3 * i + 1] = kTable[1];
    f.rgb[3 * i + 2] = kTable[2];
  }
  auto visible = [&](int i) {
    return i != s.held && s.objects[i].contained_in < 0;
  };
  const int n = static_cast<int>(s.objects.size());
  // Painter's order: floor markings, then surfaces, then items.
  for (int pass = 0; pass < 3; ++pass) {
    for (int i = 0; i < n; ++i) {
      const ObjectClass cls = s.objects[i].cls;
      const int layer = cls == ObjectClass::kRegion ? 0 : IsSurface(cls) ? 1 : 2;
      if (layer != pass || !visible(i)) continue;
      Paint(f, s.objects[i].cell, cls, static_cast<std::uint8_t>(i + 1));
    }
  }
  const Rgb g = s.held >= 0 ? kGripperClosed : kGripperOpen;
  const auto label = static_cast<std::uint8_t>(n + 1);
  for (int y = 0; y < kCellPixels; ++y) {
    for (int x = 0; x < kCellPixels; ++x) {
      if (y != 0 && y != kCellPixels - 1 && x != 0 && x != kCellPixels - 1) continue;
      const int idx = (s.gripper.row * kCellPixels + y) * f.width +
                      s.gripper.col * kCellPixels + x;
      f.rgb[3 * idx] = g[0];
      f.rgb[3 * idx + 1] = g[1];
      f.rgb[3 * idx + 2] = g[2];
      f.labels[idx] = label;
    }
  }
  return f;
}

double FrameDistance(const Frame& a, const Frame& b) {
  if (a.rgb.size() != b.rgb.size()) {
    throw std::invalid_argument("FrameDistance: size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const double d = (static_cast<double>(a.rgb[i]) - b.rgb[i]) / 255.0;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.rgb.size()));
}

ScriptedExpert::ScriptedExpert(const TaskSpec& task)
    : task_(&task), structure_(goal::Flatten(task.goal)) {}

Action ScriptedExpert::MoveToward(Cell from, Cell to) const {
  if (from.row > to.row) return Action::kMoveN;
  if (from.row < to.row) return Action::kMoveS;
  if (from.col < to.col) return Action::kMoveE;
  if (from.col > to.col) return Action::kMoveW;
  return Action::kNoOp;
}

int ScriptedExpert::ChooseBranch(const EnvState& s,
                                 const goal::EvalProgress& progress) const {
  int best = -1;
  int best_done = -1;
  int best_cost = std::numeric_limits<int>::max();
  for (std::size_t b = 0; b < structure_.branches.size(); ++b) {
    const bool alive = progress.alive.empty() || progress.alive[b];
    const int done = progress.satisfied.empty() ? 0 : progress.satisfied[b];
    if (!alive || done >= static_cast<int>(structure_.branches[b].size())) continue;
    const goal::Predicate& p = structure_.predicates[structure_.branches[b][done][0]];
    int cost = 0;
    const int x = s.Find(p.subject);
    if (x >= 0) {
      cost = Manhattan(s.gripper, s.objects[x].cell);
      const int y = p.target.empty() ? -1 : ResolveTarget(s, p.target);
      if (y >= 0) cost += Manhattan(s.objects[x].cell, s.objects[y].cell);
    }
    if (done > best_done || (done == best_done && cost < best_cost)) {
      best = static_cast<int>(b);
      best_done = done;
      best_cost = cost;
    }
  }
  return best;
}

Action ScriptedExpert::Next(const EnvState& s,
                            const goal::EvalProgress& progress) {
  if (progress.completed) return Action::kNoOp;
  // Stay with a branch once started; costs can tie mid-way.
  int b = committed_;
  if (b < 0 || (!progress.alive.empty() && !progress.alive[b])) {
    b = ChooseBranch(s, progress);
    committed_ = b;
  }
  assert(b >= 0);
  const int done = progress.satisfied.empty() ? 0 : progress.satisfied[b];
  const auto& subgoal = structure_.branches[b][done];

  // Work on the first false predicate; if all hold already, the subgoal
  // needs a falling edge first, so work on the first one.
  const goal::Predicate* p = &structure_.predicates[subgoal[0]];
  bool value = true;
  for (int idx : subgoal) {
    if (!goal::EvalPredicate(structure_.predicates[idx], s)) {
      p = &structure_.predicates[idx];
      value = false;
      break;
    }
  }

  const int x = s.Find(p->subject);
  assert(x >= 0);
  if (p->name == goal::PredicateName::kLifted) {
    if (s.held >= 0) return Action::kPlace;
    if (!(s.gripper == s.objects[x].cell)) return MoveToward(s.gripper, s.objects[x].cell);
    return Action::kPick;
  }

  const int y = ResolveTarget(s, p->target);
  assert(y >= 0);
  const Cell target = s.objects[y].cell;
  if (s.held == x) {
    if (detour_pending_ && s.gripper == detour_return_) {
      detour_pending_ = false;
      return s.gripper.row > 0 ? Action::kMoveN : Action::kMoveS;
    }
    detour_pending_ = false;
    if (!(s.gripper == target)) return MoveToward(s.gripper, target);
    return Action::kPlace;
  }
  if (s.held >= 0) return Action::kPlace;
  const Cell at = s.objects[x].cell;
  if (!(s.gripper == at)) return MoveToward(s.gripper, at);
  if (value) {
    detour_pending_ = true;
    detour_return_ = s.gripper;
  }
  return Action::kPick;
}

}  // namespace slotmem::grid
