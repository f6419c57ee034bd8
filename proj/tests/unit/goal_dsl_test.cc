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

#include "slotmem/goal/goal_dsl.h"

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "../support/goal_oracle.h"

namespace slotmem::goal {
namespace {

constexpr char kSingleBox[] =
    "(:goal\n"
    "  (Sequence\n"
    "    (And (On akita_black_bowl_1 plate_1))\n"
    "  ))";

constexpr char kSwapBox[] =
    "(:goal\n"
    "  (Or\n"
    "    (Sequence\n"
    "      (And (On akita_black_bowl_1 plate_3))\n"
    "      (And (On akita_black_bowl_2 plate_1))\n"
    "      (And (On akita_black_bowl_1 plate_2))\n"
    "    )\n"
    "    (Sequence\n"
    "      (And (On akita_black_bowl_2 plate_3))\n"
    "      (And (On akita_black_bowl_1 plate_2))\n"
    "      (And (On akita_black_bowl_2 plate_1))\n"
    "    )))";

constexpr char kNearestBasketBox[] =
    "(:goal\n"
    "  (Or\n"
    "    (Sequence\n"
    "      (And (In cream_cheese_1 basket_1_contain_region))\n"
    "      (And (On basket_1 kitchen_table_the_center))\n"
    "    )\n"
    "    (Sequence\n"
    "      (And (In cream_cheese_1 basket_2_contain_region))\n"
    "      (And (On basket_2 kitchen_table_the_center))\n"
    "    )))";

std::string ReadFile(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string GoalPath(const std::string& name) {
  return std::string(SLOTMEM_GOALS_DIR) + "/" + name + ".goal";
}

Predicate On(std::string a, std::string b) {
  return {PredicateName::kOn, std::move(a), std::move(b)};
}

// Feeds a truth trace of the single predicate of a one-predicate goal.
std::vector<int> RunSingleTrace(const GoalExpr& goal,
                                const std::vector<bool>& trace,
                                EvalProgress* final_progress = nullptr) {
  EvalProgress progress;
  std::vector<int> counts;
  for (bool v : trace) {
    progress = EvalStep(progress, goal, [v](const Predicate&) { return v; });
    counts.push_back(progress.satisfied[0]);
  }
  if (final_progress) *final_progress = progress;
  return counts;
}

TEST(GoalParseTest, SingleSubgoalBox) {
  GoalExpr g = ParseGoal(kSingleBox);
  ASSERT_EQ(g.kind, NodeKind::kSequence);
  ASSERT_EQ(g.children.size(), 1u);
  ASSERT_EQ(g.children[0].kind, NodeKind::kAnd);
  ASSERT_EQ(g.children[0].children.size(), 1u);
  EXPECT_EQ(g.children[0].children[0].kind, NodeKind::kLeaf);
  EXPECT_EQ(g.children[0].children[0].predicate,
            On("akita_black_bowl_1", "plate_1"));
}

TEST(GoalParseTest, SwapBoxHasTwoThreeStepBranches) {
  GoalExpr g = ParseGoal(kSwapBox);
  ASSERT_EQ(g.kind, NodeKind::kOr);
  ASSERT_EQ(g.children.size(), 2u);
  for (const GoalExpr& b : g.children) {
    EXPECT_EQ(b.kind, NodeKind::kSequence);
    EXPECT_EQ(b.children.size(), 3u);
  }
  EXPECT_EQ(CountSubgoals(g), (std::vector<int>{3, 3}));
}

TEST(GoalParseTest, EmptyConjunctionIsRejected) {
  try {
    ParseGoal("(:goal (And))");
    FAIL() << "expected a parse error";
  } catch (const GoalParseError& e) {
    EXPECT_NE(std::string(e.what()).find("empty conjunction"), std::string::npos);
    EXPECT_EQ(e.line(), 1);
    EXPECT_EQ(e.column(), 8);
  }
}

TEST(GoalParseTest, ErrorsCarryPositions) {
  struct Case {
    const char* text;
    const char* needle;
    int line;
    int column;
  };
  const Case cases[] = {
      {"(:goal (Near a b))", "unknown predicate", 1, 9},
      {"(:goal\n  (On a))", "arity mismatch", 2, 4},
      {"(:goal (Lifted a b))", "arity mismatch", 1, 9},
      {"(:goal (Or (And (On a b))))", "Or branches", 1, 12},
      {"(:goal (Sequence (Or (Sequence (On a b)))))", "Sequence steps", 1, 18},
      {"(:goal (And (Sequence (On a b))))", "And accepts", 1, 13},
      {"(:goal (On A b))", "invalid identifier", 1, 12},
      {"(:goal (On a b)", "unexpected end", 1, 16},
      {"(:goal (On a b)) x", "trailing input", 1, 18},
      {"(goal (On a b))", "expected ':goal'", 1, 2},
      {"", "unexpected end", 1, 1},
  };
  for (const Case& c : cases) {
    try {
      ParseGoal(c.text);
      ADD_FAILURE() << "no error for " << c.text;
    } catch (const GoalParseError& e) {
      EXPECT_NE(std::string(e.what()).find(c.needle), std::string::npos)
          << c.text << " -> " << e.what();
      EXPECT_EQ(e.line(), c.line) << c.text;
      EXPECT_EQ(e.column(), c.column) << c.text;
    }
  }
}

TEST(GoalParseTest, HeadsAreCaseInsensitiveAndCommentsIgnored) {
  GoalExpr a = ParseGoal(
      "; leading comment\n(:GOAL (sequence (and (on bowl_1 plate_1)) ; tail\n"
      "(LIFTED bowl_1)))");
  GoalExpr b = ParseGoal(
      "(:goal (Sequence (And (On bowl_1 plate_1)) (Lifted bowl_1)))");
  EXPECT_EQ(a, b);
  EXPECT_EQ(PrintGoal(a),
            "(:goal (Sequence (And (On bowl_1 plate_1)) (Lifted bowl_1)))");
}

TEST(GoalParseTest, ShippedGoalsRoundTrip) {
  const char* names[] = {"T1", "T2", "T3", "T4", "T5", "T6", "T7", "T8", "T9",
                         "T10", "T1_lifted", "T2_lifted", "T3_lifted",
                         "T4_lifted", "T5_lifted", "T6_lifted"};
  for (const char* name : names) {
    std::string text = ReadFile(GoalPath(name));
    ASSERT_FALSE(text.empty()) << name;
    GoalExpr g = ParseGoal(text);
    EXPECT_EQ(PrintGoal(g), NormalizeWhitespace(text)) << name;
    EXPECT_EQ(ParseGoal(PrintGoal(g)), g) << name;
    EXPECT_EQ(ParseGoal(PrintGoalPretty(g)), g) << name;
    EXPECT_EQ(NormalizeWhitespace(PrintGoalPretty(g)), PrintGoal(g)) << name;
  }
}

TEST(GoalParseTest, ShippedGoalsMatchReferenceBoxes) {
  EXPECT_EQ(NormalizeWhitespace(ReadFile(GoalPath("T1"))),
            NormalizeWhitespace(kSingleBox));
  EXPECT_EQ(NormalizeWhitespace(ReadFile(GoalPath("T7"))),
            NormalizeWhitespace(kSwapBox));
  EXPECT_EQ(NormalizeWhitespace(ReadFile(GoalPath("T9"))),
            NormalizeWhitespace(kNearestBasketBox));
  EXPECT_EQ(CountSubgoals(LoadGoalFile(GoalPath("T3"))),
            (std::vector<int>{3}));
  EXPECT_EQ(CountSubgoals(LoadGoalFile(GoalPath("T6"))),
            (std::vector<int>{7}));
  EXPECT_EQ(CountSubgoals(LoadGoalFile(GoalPath("T8"))),
            (std::vector<int>{4, 4, 4}));
  EXPECT_EQ(CountSubgoals(LoadGoalFile(GoalPath("T3_lifted"))),
            (std::vector<int>{6}));
}

TEST(GoalParseTest, FuzzTreesRoundTrip) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 500; ++i) {
    testing::RandomGoalCase c = testing::MakeRandomGoalCase(rng);
    std::string printed = PrintGoal(c.tree);
    GoalExpr parsed = ParseGoal(printed);
    EXPECT_EQ(parsed, c.tree) << printed;
    EXPECT_EQ(ParseGoal(PrintGoalPretty(parsed)), parsed) << printed;
  }
}

TEST(GoalParseTest, CountSubgoalsMatchesTreeWalk) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 300; ++i) {
    testing::RandomGoalCase c = testing::MakeRandomGoalCase(rng);
    // Independent walk over the tree itself.
    std::vector<int> walked;
    const GoalExpr& t = c.tree;
    if (t.kind == NodeKind::kOr) {
      for (const GoalExpr& s : t.children) {
        walked.push_back(static_cast<int>(s.children.size()));
      }
    } else if (t.kind == NodeKind::kSequence) {
      walked.push_back(static_cast<int>(t.children.size()));
    } else {
      walked.push_back(1);
    }
    EXPECT_EQ(CountSubgoals(c.tree), walked);
  }
  EXPECT_EQ(CountSubgoals(ParseGoal("(:goal (And (On a b) (And (On b c))))")),
            (std::vector<int>{1}));
}

TEST(GoalEvalTest, RepeatedSubgoalNeedsRisingEdges) {
  GoalExpr g = LoadGoalFile(GoalPath("T3"));
  EvalProgress final;
  std::vector<int> counts =
      RunSingleTrace(g, {false, true, true, false, true, false, true, true},
                     &final);
  EXPECT_EQ(counts, (std::vector<int>{0, 1, 1, 1, 2, 2, 3, 3}));
  EXPECT_TRUE(final.completed);
  EXPECT_FALSE(final.failed);

  // Completion happens exactly at the seventh observation.
  EvalProgress p;
  const std::vector<bool> trace = {false, true, true, false, true, false, true};
  for (std::size_t i = 0; i < trace.size(); ++i) {
    bool v = trace[i];
    p = EvalStep(p, g, [v](const Predicate&) { return v; });
    EXPECT_EQ(p.completed, i == 6);
  }
}

TEST(GoalEvalTest, TrueAtFirstCallCompletes) {
  GoalExpr g = LoadGoalFile(GoalPath("T1"));
  EvalProgress p = EvalStep({}, g, [](const Predicate&) { return true; });
  EXPECT_TRUE(p.completed);
  EXPECT_FALSE(p.failed);
  EXPECT_DOUBLE_EQ(SubgoalCompletion(p, g), 1.0);
}

TEST(GoalEvalTest, OverRepetitionFailsAndFreezesCompletion) {
  GoalExpr g = LoadGoalFile(GoalPath("T3"));
  EvalProgress final;
  RunSingleTrace(g, {false, true, false, true, false, true, true, false, true},
                 &final);
  EXPECT_TRUE(final.completed);
  EXPECT_TRUE(final.failed);
  EXPECT_EQ(final.satisfied[0], 3);
  EXPECT_DOUBLE_EQ(SubgoalCompletion(final, g), 1.0);
}

TEST(GoalEvalTest, SwapBranchPruning) {
  GoalExpr g = LoadGoalFile(GoalPath("T7"));
  auto state = [](std::vector<Predicate> true_preds) {
    return [true_preds](const Predicate& p) {
      for (const auto& q : true_preds) {
        if (q == p) return true;
      }
      return false;
    };
  };
  EvalProgress p = EvalStep({}, g, state({}));
  EXPECT_EQ(p.alive, (std::vector<bool>{true, true}));
  EXPECT_DOUBLE_EQ(SubgoalCompletion(p, g), 0.0);
  p = EvalStep(p, g, state({On("akita_black_bowl_1", "plate_3")}));
  EXPECT_EQ(p.alive, (std::vector<bool>{true, false}));
  EXPECT_EQ(p.satisfied, (std::vector<int>{1, 0}));
  EXPECT_NEAR(SubgoalCompletion(p, g), 1.0 / 3.0, 1e-15);
  GoalStructure st = Flatten(g);
  auto pending = PendingSubgoals(p, st);
  ASSERT_EQ(pending.size(), 1u);
  EXPECT_EQ(pending[0].first, 0);
  ASSERT_EQ(pending[0].second.size(), 1u);
  EXPECT_EQ(st.predicates[pending[0].second[0]],
            On("akita_black_bowl_2", "plate_1"));
}

TEST(GoalEvalTest, FreshProgressScoresZero) {
  GoalExpr g = LoadGoalFile(GoalPath("T8"));
  EXPECT_DOUBLE_EQ(SubgoalCompletion(EvalProgress{}, g), 0.0);
}

TEST(GoalEvalTest, PredicatesOnStates) {
  grid::EnvState s;
  s.objects = {
      {"akita_black_bowl_1", grid::ObjectClass::kBowl, {2, 3}, -1},
      {"plate_1", grid::ObjectClass::kPlate, {2, 3}, -1},
      {"basket_1", grid::ObjectClass::kBasket, {5, 5}, -1},
      {"cream_cheese_1", grid::ObjectClass::kCheese, {5, 5}, 2},
  };
  s.gripper = {2, 3};
  EXPECT_TRUE(EvalPredicate(On("akita_black_bowl_1", "plate_1"), s));
  EXPECT_FALSE(EvalPredicate(On("akita_black_bowl_1", "akita_black_bowl_1"), s));
  Predicate lifted{PredicateName::kLifted, "akita_black_bowl_1", ""};
  EXPECT_FALSE(EvalPredicate(lifted, s));
  s.held = 0;
  EXPECT_TRUE(EvalPredicate(lifted, s));
  EXPECT_FALSE(EvalPredicate(On("akita_black_bowl_1", "plate_1"), s));

  Predicate in{PredicateName::kIn, "cream_cheese_1", "basket_1_contain_region"};
  EXPECT_TRUE(EvalPredicate(in, s));
  in.target = "basket_1";
  EXPECT_TRUE(EvalPredicate(in, s));
  // Contained objects do not rest on anything.
  EXPECT_FALSE(EvalPredicate(On("cream_cheese_1", "basket_1"), s));
  EXPECT_THROW(EvalPredicate(On("ghost_1", "plate_1"), s), GoalEvalError);
  EXPECT_THROW(EvalPredicate(On("plate_1", "plate_1_contain_region"), s),
               GoalEvalError);
}

TEST(GoalEvalTest, MatchesWholeTraceOracle) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    testing::RandomGoalCase c = testing::MakeRandomGoalCase(rng);
    EvalProgress inc = testing::RunIncremental(c);
    testing::OracleOutcome ref = testing::BruteForceEvaluate(c);
    ASSERT_EQ(inc.completed, ref.completed) << PrintGoal(c.tree);
    ASSERT_EQ(inc.failed, ref.failed) << PrintGoal(c.tree);
    ASSERT_EQ(inc.satisfied, ref.satisfied) << PrintGoal(c.tree);
  }
}

TEST(GoalEvalTest, MonotoneAndOneStepPerCall) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 500; ++i) {
    testing::RandomGoalCase c = testing::MakeRandomGoalCase(rng);
    EvalProgress p;
    bool was_completed = false;
    for (const auto& values : c.trace) {
      EvalProgress next = EvalStep(p, c.tree, [&](const Predicate& q) {
        for (std::size_t k = 0; k < c.pool.size(); ++k) {
          if (c.pool[k] == q) return bool(values[k]);
        }
        return false;
      });
      for (std::size_t b = 0; b < next.satisfied.size(); ++b) {
        int before = p.satisfied.empty() ? 0 : p.satisfied[b];
        EXPECT_GE(next.satisfied[b], before);
        EXPECT_LE(next.satisfied[b], before + 1);
        if (!p.alive.empty() && !p.alive[b]) {
          EXPECT_FALSE(next.alive[b]);
        }
      }
      if (was_completed) {
        EXPECT_EQ(next.satisfied, p.satisfied);
        EXPECT_DOUBLE_EQ(SubgoalCompletion(next, c.tree),
                         SubgoalCompletion(p, c.tree));
      }
      was_completed = next.completed;
      p = next;
    }
  }
}

}  // namespace
}  // namespace slotmem::goal
