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

// Demonstration episodes: expert rollouts, the on-disk container, dataset
// generation, and the observation-aliasing audit.

#ifndef SLOTMEM_GRID_DATASET_H_
#define SLOTMEM_GRID_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include "slotmem/goal/goal_dsl.h"
#include "slotmem/grid/env_state.h"
#include "slotmem/grid/memgrid.h"

namespace slotmem::grid {

struct FrameAnnotation {
  std::vector<int> satisfied;  // per goal branch
  std::vector<bool> alive;
  bool completed = false;
  bool failed = false;
  bool invalid_action = false;  // the action leading into this frame
  // Per object: satisfied subgoals of the leading branch that mention it.
  std::vector<int> object_subgoals;

  friend bool operator==(const FrameAnnotation&, const FrameAnnotation&) = default;
};

struct Episode {
  std::string task_id;
  std::string instruction;
  std::string goal_text;
  std::uint64_t seed = 0;
  int dilation = 1;
  std::vector<Frame> frames;              // T + 1
  std::vector<Action> actions;            // T; actions[t] is taken at frames[t]
  std::vector<EnvState> states;           // T + 1
  std::vector<FrameAnnotation> annotations;  // T + 1

  int num_frames() const { return static_cast<int>(frames.size()); }
};

FrameAnnotation Annotate(const goal::EvalProgress& progress,
                         const goal::GoalStructure& structure,
                         const EnvState& s, bool invalid_action);

// Rolls the scripted expert from Reset(task, seed). Every expert action is
// preceded by dilation - 1 NoOp holds; the expert's single NoOp after
// completion closes the episode.
Episode RunExpertEpisode(const TaskSpec& task, std::uint64_t seed,
                         int dilation);

void WriteEpisode(const std::string& path, const Episode& episode);
Episode ReadEpisode(const std::string& path);

struct DatasetEntry {
  std::string split;  // "train" or "val"
  std::string file;   // relative to the dataset directory
  std::string task_id;
  std::uint64_t seed = 0;
  int frames = 0;
};

// Train seeds are base_seed + i, validation seeds base_seed + n_train + i.
// Writes <out_dir>/<task>_<split>_<i>.ep files and appends to
// <out_dir>/index.txt. Returns the entries written.
std::vector<DatasetEntry> GenerateDataset(const TaskSpec& task, int n_train,
                                          int n_val, std::uint64_t base_seed,
                                          int dilation,
                                          const std::string& out_dir);

std::vector<DatasetEntry> ReadIndex(const std::string& dir);
// Loads the episodes of one split ("" for all), optionally one task only.
std::vector<Episode> LoadEpisodes(const std::string& dir,
                                  const std::string& split,
                                  const std::string& task_id = "");

struct AliasedPair {
  int episode_a = 0;
  int frame_a = 0;
  int episode_b = 0;
  int frame_b = 0;
  double distance = 0.0;
  Action action_a = Action::kNoOp;
  Action action_b = Action::kNoOp;
};

struct AliasingReport {
  double epsilon = 0.0;
  std::int64_t frames_scanned = 0;
  // Pairs of action-bearing frames closer than epsilon.
  std::int64_t close_pairs = 0;
  // Of those, pairs whose expert actions differ.
  std::int64_t violations = 0;
  double min_violation_distance = -1.0;  // -1 when there are none
  std::vector<AliasedPair> examples;     // up to max_examples
};

// Finds frame pairs with FrameDistance < epsilon (exact duplicates when
// epsilon is 0) whose expert actions differ. Final frames carry no action
// and are skipped.
AliasingReport VerifyAliasing(const std::vector<Episode>& episodes,
                              double epsilon, int max_examples = 10);

struct TokenRow {
  int horizon = 1;
  int tokens_per_frame = 0;
  int concat_tokens = 0;  // horizon * tokens_per_frame
  int slot_ssm_tokens = 0;  // num_slots + num_relation, independent of horizon
};

TokenRow TokenCount(int horizon, int tokens_per_frame, int num_slots,
                    int num_relation);

}  // namespace slotmem::grid

#endif  // SLOTMEM_GRID_DATASET_H_
