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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "slotmem/grid/dataset.h"

namespace slotmem::grid {
namespace {

namespace fs = std::filesystem;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("slotmem_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int CountLabel(const Frame& f, int label) {
  int n = 0;
  for (std::uint8_t l : f.labels) n += l == label;
  return n;
}

bool Holds(const EnvState& s, const std::string& text) {
  goal::GoalExpr g = goal::ParseGoal("(:goal " + text + ")");
  return goal::EvalPredicate(g.predicate, s);
}

TEST(MemGridTest, TaskRegistry) {
  EXPECT_EQ(TaskIds().size(), 10u);
  EXPECT_EQ(AllTaskIds().size(), 16u);
  EXPECT_EQ(GetTask("T3").dimensions, (std::vector<std::string>{"OM", "OS"}));
  EXPECT_EQ(GetTask("T9").dimensions, (std::vector<std::string>{"OM", "OO"}));
  EXPECT_THROW(GetTask("T11"), std::invalid_argument);
  for (const std::string& id : AllTaskIds()) {
    // Compiled-in goals equal the shipped files.
    std::string file = ReadFile(std::string(SLOTMEM_GOALS_DIR) + "/" + id + ".goal");
    EXPECT_EQ(GetTask(id).goal_text, file) << id;
    EXPECT_EQ(TaskIndex(id), static_cast<int>(&id - &AllTaskIds()[0]));
  }
}

TEST(MemGridTest, ResetIsDeterministic) {
  for (const std::string& id : AllTaskIds()) {
    const TaskSpec& t = GetTask(id);
    EnvState a = Reset(t, 0);
    EnvState b = Reset(t, 0);
    EXPECT_EQ(a, b) << id;
    EXPECT_EQ(Render(a), Render(b)) << id;
  }
  EXPECT_FALSE(Reset(GetTask("T7"), 0) == Reset(GetTask("T7"), 1));
}

TEST(MemGridTest, Layouts) {
  EnvState t3 = Reset(GetTask("T3"), 5);
  ASSERT_EQ(t3.objects.size(), 2u);
  EXPECT_EQ(t3.objects[0].cls, ObjectClass::kBowl);
  EXPECT_EQ(t3.objects[1].cls, ObjectClass::kPlate);
  EXPECT_FALSE(t3.objects[0].cell == t3.objects[1].cell);

  EnvState t9 = Reset(GetTask("T9"), 5);
  std::set<std::string> ids;
  for (const auto& o : t9.objects) ids.insert(o.id);
  EXPECT_EQ(ids, (std::set<std::string>{"cream_cheese_1", "basket_1", "basket_2",
                                        "kitchen_table_the_center"}));

  EnvState t8 = Reset(GetTask("T8"), 5);
  EXPECT_EQ(t8.objects.size(), 7u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_TRUE(Holds(t8, "(On akita_black_bowl_" + std::to_string(i + 1) +
                              " plate_" + std::to_string(i + 1) + ")"));
  }
}

TEST(MemGridTest, PickHidesObjectAndLifts) {
  EnvState s = Reset(GetTask("T1"), 3);
  s.gripper = s.objects[0].cell;
  StepResult r = Step(s, Action::kPick);
  EXPECT_FALSE(r.invalid);
  EXPECT_EQ(r.state.held, 0);
  EXPECT_TRUE(Holds(r.state, "(Lifted akita_black_bowl_1)"));
  EXPECT_FALSE(Holds(r.state, "(On akita_black_bowl_1 plate_1)"));
  Frame f = Render(r.state);
  EXPECT_EQ(CountLabel(f, 1), 0);
  EXPECT_GT(CountLabel(f, 2), 0);

  // A second pick with a full hand is a flagged no-op.
  StepResult again = Step(r.state, Action::kPick);
  EXPECT_TRUE(again.invalid);
  EXPECT_EQ(again.state, r.state);
}

TEST(MemGridTest, PlaceInBasketOccludes) {
  EnvState s = Reset(GetTask("T9"), 1);
  s.gripper = s.objects[0].cell;
  s = Step(s, Action::kPick).state;
  s.gripper = s.objects[1].cell;  // over basket_1
  s.objects[0].cell = s.gripper;
  StepResult r = Step(s, Action::kPlace);
  EXPECT_FALSE(r.invalid);
  EXPECT_EQ(r.state.objects[0].contained_in, 1);
  EXPECT_TRUE(Holds(r.state, "(In cream_cheese_1 basket_1_contain_region)"));
  EXPECT_EQ(CountLabel(Render(r.state), 1), 0);

  // Carrying the basket carries its contents.
  EnvState c = Step(r.state, Action::kPick).state;
  EXPECT_EQ(c.held, 1);
  c = Step(c, c.gripper.row > 0 ? Action::kMoveN : Action::kMoveS).state;
  EXPECT_EQ(c.objects[0].cell, c.gripper);
  EXPECT_EQ(c.objects[1].cell, c.gripper);
}

TEST(MemGridTest, MovesClampAtBorders) {
  EnvState s = Reset(GetTask("T1"), 0);
  s.gripper = {0, 0};
  EXPECT_EQ(Step(s, Action::kMoveN).state.gripper, (Cell{0, 0}));
  EXPECT_EQ(Step(s, Action::kMoveW).state.gripper, (Cell{0, 0}));
  s.gripper = {7, 7};
  EXPECT_EQ(Step(s, Action::kMoveS).state.gripper, (Cell{7, 7}));
  EXPECT_EQ(Step(s, Action::kMoveE).state.gripper, (Cell{7, 7}));
  EXPECT_EQ(Step(s, Action::kMoveW).state.gripper, (Cell{7, 6}));
}

TEST(MemGridTest, InvalidPlacementsAreNoOps) {
  EnvState s = Reset(GetTask("T7"), 2);
  // Holding bowl 1, bowl 2's plate is occupied.
  s.gripper = s.objects[0].cell;
  s = Step(s, Action::kPick).state;
  s.gripper = s.objects[1].cell;
  s.objects[0].cell = s.gripper;
  StepResult r = Step(s, Action::kPlace);
  EXPECT_TRUE(r.invalid);
  EXPECT_EQ(r.state.held, 0);
  EXPECT_TRUE(Step(Reset(GetTask("T1"), 0), Action::kPlace).invalid);
}

TEST(MemGridTest, MasksPartitionForeground) {
  for (const std::string& id : TaskIds()) {
    Episode ep = RunExpertEpisode(GetTask(id), 4, 1);
    for (int t = 0; t < ep.num_frames(); ++t) {
      const Frame& f = ep.frames[t];
      const EnvState& s = ep.states[t];
      for (int i = 0; i < f.height * f.width; ++i) {
        const bool table = f.rgb[3 * i] == 214 && f.rgb[3 * i + 1] == 200 &&
                           f.rgb[3 * i + 2] == 172;
        ASSERT_EQ(f.labels[i] == 0, table) << id << " t=" << t;
      }
      for (std::size_t o = 0; o < s.objects.size(); ++o) {
        const bool hidden =
            static_cast<int>(o) == s.held || s.objects[o].contained_in >= 0;
        if (hidden) {
          EXPECT_EQ(CountLabel(f, static_cast<int>(o) + 1), 0);
        }
      }
      EXPECT_EQ(CountLabel(f, static_cast<int>(s.objects.size()) + 1), 28);
    }
  }
}

TEST(MemGridTest, ExpertCompletesEveryTask) {
  for (const std::string& id : AllTaskIds()) {
    const TaskSpec& task = GetTask(id);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Episode ep = RunExpertEpisode(task, seed, 1);
      const FrameAnnotation& last = ep.annotations.back();
      EXPECT_TRUE(last.completed) << id << " seed " << seed;
      EXPECT_FALSE(last.failed) << id << " seed " << seed;
      EXPECT_EQ(ep.actions.back(), Action::kNoOp);
      for (const FrameAnnotation& a : ep.annotations) {
        EXPECT_FALSE(a.invalid_action) << id << " seed " << seed;
      }
      // Object count is conserved and containment is acyclic.
      for (const EnvState& s : ep.states) {
        EXPECT_EQ(s.objects.size(), ep.states[0].objects.size());
        for (const ObjectState& o : s.objects) {
          if (o.contained_in >= 0) {
            EXPECT_LT(s.objects[o.contained_in].contained_in, 0);
            EXPECT_EQ(s.objects[o.contained_in].cell, o.cell);
          }
        }
      }
    }
  }
}

TEST(MemGridTest, SinglePlacementEndsWithPlace) {
  Episode ep = RunExpertEpisode(GetTask("T1"), 0, 1);
  ASSERT_GE(ep.actions.size(), 2u);
  EXPECT_EQ(ep.actions[ep.actions.size() - 2], Action::kPlace);
  EXPECT_TRUE(ep.annotations[ep.num_frames() - 2].completed);
}

TEST(MemGridTest, RepeatedTaskHasThreeRisingEdges) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Episode ep = RunExpertEpisode(GetTask("T3"), seed, 1);
    int edges = 0;
    bool prev = false;
    for (int t = 0; t < ep.num_frames(); ++t) {
      bool now = Holds(ep.states[t], "(On akita_black_bowl_1 plate_1)");
      if (now && (t == 0 || !prev)) ++edges;
      prev = now;
    }
    EXPECT_EQ(edges, 3) << seed;
  }
}

TEST(MemGridTest, NearestBasketReceivesCheese) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Episode ep = RunExpertEpisode(GetTask("T9"), seed, 1);
    const EnvState& s0 = ep.states[0];
    const int d1 = Manhattan(s0.objects[0].cell, s0.objects[1].cell);
    const int d2 = Manhattan(s0.objects[0].cell, s0.objects[2].cell);
    const std::string nearest = d1 < d2 ? "basket_1" : "basket_2";
    EXPECT_TRUE(Holds(ep.states.back(),
                      "(In cream_cheese_1 " + nearest + "_contain_region)"));
    EXPECT_TRUE(Holds(ep.states.back(),
                      "(On " + nearest + " kitchen_table_the_center)"));
  }
}

TEST(MemGridTest, DilationInsertsHolds) {
  Episode e1 = RunExpertEpisode(GetTask("T3"), 7, 1);
  Episode e3 = RunExpertEpisode(GetTask("T3"), 7, 3);
  const int n = static_cast<int>(e1.actions.size());
  ASSERT_EQ(static_cast<int>(e3.actions.size()), 3 * n);
  EXPECT_EQ(e3.num_frames(), 3 * n + 1);
  for (int i = 0; i < n; ++i) {
    EXPECT_EQ(e3.actions[3 * i], Action::kNoOp);
    EXPECT_EQ(e3.actions[3 * i + 1], Action::kNoOp);
    EXPECT_EQ(e3.actions[3 * i + 2], e1.actions[i]);
    EXPECT_EQ(e3.states[3 * i + 3], e1.states[i + 1]);
  }
}

TEST(MemGridTest, SubgoalFlagsAreMonotone) {
  Episode ep = RunExpertEpisode(GetTask("T8"), 3, 1);
  for (int t = 1; t < ep.num_frames(); ++t) {
    for (std::size_t b = 0; b < ep.annotations[t].satisfied.size(); ++b) {
      EXPECT_GE(ep.annotations[t].satisfied[b], ep.annotations[t - 1].satisfied[b]);
    }
  }
  // Bowl 1 moves twice on the winning branch, every bowl at least once.
  const auto& last = ep.annotations.back().object_subgoals;
  int total = 0;
  for (int i = 0; i < 3; ++i) {
    EXPECT_GE(last[i], 1);
    total += last[i];
  }
  EXPECT_EQ(total, 4);
}

TEST(EpisodeIoTest, RoundTrip) {
  fs::path dir = TempDir("episode_io");
  Episode ep = RunExpertEpisode(GetTask("T9"), 11, 2);
  const std::string path = (dir / "x.ep").string();
  WriteEpisode(path, ep);
  Episode back = ReadEpisode(path);
  EXPECT_EQ(back.task_id, ep.task_id);
  EXPECT_EQ(back.goal_text, ep.goal_text);
  EXPECT_EQ(back.instruction, ep.instruction);
  EXPECT_EQ(back.seed, ep.seed);
  EXPECT_EQ(back.dilation, 2);
  EXPECT_EQ(back.frames, ep.frames);
  EXPECT_EQ(back.actions, ep.actions);
  EXPECT_EQ(back.states, ep.states);
  EXPECT_EQ(back.annotations, ep.annotations);

  std::ofstream(dir / "bad.ep") << "garbage";
  EXPECT_THROW(ReadEpisode((dir / "bad.ep").string()), std::runtime_error);
}

TEST(EpisodeIoTest, GenerateDatasetSplits) {
  fs::path dir = TempDir("gen");
  auto entries = GenerateDataset(GetTask("T1"), 3, 2, 100, 2, dir.string());
  ASSERT_EQ(entries.size(), 5u);
  EXPECT_EQ(entries[0].seed, 100u);
  EXPECT_EQ(entries[3].split, "val");
  EXPECT_EQ(entries[3].seed, 103u);
  GenerateDataset(GetTask("T3"), 0, 1, 0, 2, dir.string());
  // Regenerating a task replaces its rows instead of duplicating them.
  const std::string index_before = ReadFile((dir / "index.txt").string());
  GenerateDataset(GetTask("T1"), 3, 2, 100, 2, dir.string());
  EXPECT_EQ(ReadFile((dir / "index.txt").string()), index_before);
  EXPECT_EQ(ReadIndex(dir.string()).size(), 6u);
  EXPECT_EQ(LoadEpisodes(dir.string(), "train", "T1").size(), 3u);
  EXPECT_EQ(LoadEpisodes(dir.string(), "train", "T3").size(), 0u);
  EXPECT_EQ(LoadEpisodes(dir.string(), "val").size(), 3u);
}

TEST(AliasingTest, RepeatedTaskHasViolations) {
  std::vector<Episode> eps;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    eps.push_back(RunExpertEpisode(GetTask("T3"), seed, 1));
  }
  AliasingReport r = VerifyAliasing(eps, 1e-3);
  EXPECT_GE(r.violations, 1);
  EXPECT_EQ(r.min_violation_distance, 0.0);
  ASSERT_FALSE(r.examples.empty());
  const AliasedPair& p = r.examples[0];
  EXPECT_EQ(eps[p.episode_a].frames[p.frame_a], eps[p.episode_b].frames[p.frame_b]);
  EXPECT_NE(p.action_a, p.action_b);
}

TEST(AliasingTest, IdenticalEpisodesDoNotCount) {
  Episode ep = RunExpertEpisode(GetTask("T1"), 0, 1);
  AliasingReport one = VerifyAliasing({ep}, 0.0);
  AliasingReport two = VerifyAliasing({ep, ep}, 0.0);
  // Every frame pairs with its own copy at the same action; only pairs that
  // already disagreed within one episode are counted, once per ordering
  // across copies and once inside each copy.
  const std::int64_t steps = static_cast<std::int64_t>(ep.actions.size());
  EXPECT_EQ(two.close_pairs, 4 * one.close_pairs + steps);
  EXPECT_EQ(two.violations, 4 * one.violations);
}

TEST(AliasingTest, HoldsAliasAcrossDilation) {
  Episode ep = RunExpertEpisode(GetTask("T1"), 0, 3);
  AliasingReport r = VerifyAliasing({ep}, 0.0);
  // Each expert action shares its frame with two holds before it.
  EXPECT_GE(r.close_pairs, static_cast<std::int64_t>(ep.actions.size()));
  EXPECT_GT(r.violations, 0);
}

TEST(AliasingTest, NearPairsWithinEpsilon) {
  Episode ep = RunExpertEpisode(GetTask("T1"), 0, 1);
  Episode shifted = ep;
  // Perturb one channel of one pixel: still within epsilon, no longer equal.
  shifted.frames[0].rgb[0] ^= 1;
  shifted.actions[0] = ep.actions[0] == Action::kPick ? Action::kPlace : Action::kPick;
  AliasingReport r = VerifyAliasing({ep, shifted}, 1e-3);
  EXPECT_GE(r.violations, 1);
  EXPECT_GT(r.min_violation_distance, -1.0);
  AliasingReport exact = VerifyAliasing({ep, shifted}, 0.0);
  EXPECT_LT(exact.violations, r.violations);
}

TEST(TokenReportTest, HeaderArithmetic) {
  EXPECT_EQ(TokenCount(8, 16, 16, 16).concat_tokens, 128);
  EXPECT_EQ(TokenCount(1, 256, 16, 16).concat_tokens, 256);
  EXPECT_EQ(TokenCount(1, 16, 16, 16).concat_tokens, 16);
  for (int h : {1, 8, 64, 700}) {
    EXPECT_EQ(TokenCount(h, 16, 16, 16).slot_ssm_tokens, 32);
  }
  EXPECT_THROW(TokenCount(0, 16, 16, 16), std::invalid_argument);
}

}  // namespace
}  // namespace slotmem::grid
