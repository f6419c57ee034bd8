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

// Top-down pick-and-place grid world. The gripper moves over an 8x8 table,
// picks up bowls, bottles, cheese and baskets and sets them down on plates,
// baskets, the center region or the bare table.

#ifndef SLOTMEM_GRID_MEMGRID_H_
#define SLOTMEM_GRID_MEMGRID_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "slotmem/goal/goal_dsl.h"
#include "slotmem/grid/env_state.h"

namespace slotmem::grid {

enum class Action : std::uint8_t {
  kMoveN = 0,
  kMoveS = 1,
  kMoveE = 2,
  kMoveW = 3,
  kPick = 4,
  kPlace = 5,
  kNoOp = 6,
};
inline constexpr int kNumActions = 7;
const char* ActionName(Action a);

inline constexpr int kGridSize = 8;
inline constexpr int kCellPixels = 8;
inline constexpr int kImageSize = kGridSize * kCellPixels;

// Rendered observation. `labels` holds one instance label per pixel:
// 0 is the table, 1 + i is object i, objects.size() + 1 is the gripper.
struct Frame {
  int height = kImageSize;
  int width = kImageSize;
  std::vector<std::uint8_t> rgb;     // height * width * 3
  std::vector<std::uint8_t> labels;  // height * width

  friend bool operator==(const Frame&, const Frame&) = default;
};

enum class Layout { kItemAndPlate, kSwapTwo, kSwapThree, kBaskets };

struct TaskSpec {
  std::string id;
  std::vector<std::string> dimensions;  // subset of OM, OS, OR, OO
  std::string instruction;
  std::string goal_text;
  goal::GoalExpr goal;
  Layout layout = Layout::kItemAndPlate;
  std::string item_id;  // kItemAndPlate only
  ObjectClass item_class = ObjectClass::kBowl;
  int dilation = 2;
};

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The ten benchmark tasks "T1".."T10".
const std::vector<std::string>& TaskIds();
// TaskIds() plus the variants of T1-T6 that also grade the lift
// ("T1_lifted", ...).
const std::vector<std::string>& AllTaskIds();
const TaskSpec& GetTask(const std::string& id);
// Index of `id` in AllTaskIds(); used for the task embedding table.
int TaskIndex(const std::string& id);

EnvState Reset(const TaskSpec& task, std::uint64_t seed);

struct StepResult {
  EnvState state;
  bool invalid = false;  // Pick/Place that had no effect
};
StepResult Step(const EnvState& s, Action a);

Frame Render(const EnvState& s);

// Mean over pixels and channels of squared intensity differences (in [0,1]
// units), square-rooted.
double FrameDistance(const Frame& a, const Frame& b);

// Chooses the demonstrator's next action. Stateful only for the detour that
// a repeated subgoal needs: after lifting an object from where the pending
// subgoal wants it, the expert steps one cell away and back before placing
// it, so the subgoal's predicate goes false and true again.
class ScriptedExpert {
 public:
  explicit ScriptedExpert(const TaskSpec& task);

  Action Next(const EnvState& s, const goal::EvalProgress& progress);

 private:
  Action MoveToward(Cell from, Cell to) const;
  int ChooseBranch(const EnvState& s, const goal::EvalProgress& progress) const;

  const TaskSpec* task_;
  goal::GoalStructure structure_;
  int committed_ = -1;
  bool detour_pending_ = false;
  Cell detour_return_;
};

}  // namespace slotmem::grid

#endif  // SLOTMEM_GRID_MEMGRID_H_
